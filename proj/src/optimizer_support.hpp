// Copyright 2026 The rally-qoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Evaluation bookkeeping shared by the optimizers.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rally/optimizers.hpp"

namespace rally::detail {

// Thrown through the optimizer loop to unwind on a terminal event.
struct StopSignal {
  StopReason reason;
};

class EvaluationBook {
 public:
  EvaluationBook(const OptimizerConfig& config, std::size_t n)
      : config_(config), start_(std::chrono::steady_clock::now()) {
    run_.best_fom = std::numeric_limits<double>::infinity();
    run_.best_params.assign(n, 0.0);
  }

  /// Call before every objective evaluation.
  void reserve() const {
    if (run_.fom_evaluations >= config_.max_fom_evals) throw StopSignal{StopReason::MaxEvals};
    if (config_.max_seconds &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() >
            *config_.max_seconds) {
      throw StopSignal{StopReason::TimeBudget};
    }
  }

  /// Call after every objective evaluation.
  void record(std::span<const double> x, double f) {
    ++run_.fom_evaluations;
    if (f < run_.best_fom || run_.trace.empty()) {
      if (f < run_.best_fom) {
        run_.best_fom = f;
        run_.best_params.assign(x.begin(), x.end());
      }
      run_.trace.push_back({run_.fom_evaluations, run_.best_fom});
    }
    if (config_.target && run_.best_fom <= *config_.target) {
      throw StopSignal{StopReason::TargetReached};
    }
  }

  OptimizationRun finish(StopReason reason, long iterations) {
    run_.stop_reason = reason;
    run_.iterations = iterations;
    if (run_.trace.empty() || run_.trace.back().evaluations != run_.fom_evaluations) {
      run_.trace.push_back({run_.fom_evaluations, run_.best_fom});
    }
    run_.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(run_);
  }

  long evaluations() const { return run_.fom_evaluations; }

 private:
  const OptimizerConfig& config_;
  std::chrono::steady_clock::time_point start_;
  OptimizationRun run_;
};

inline void clamp_to_box(std::vector<double>& x, const OptimizerConfig& config) {
  if (!config.bounded()) return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], config.lower[i], config.upper[i]);
  }
}

}  // namespace rally::detail
