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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rally/fom.hpp"
#include "rally/hamiltonians.hpp"
#include "rally/pulses.hpp"

namespace rally {

enum class OptimizerMethod { AdaptiveNelderMead, BoundedQuasiNewton };
enum class StopReason { Tolerance, MaxEvals, TargetReached, LineSearchFailure, TimeBudget };

const char* to_string(OptimizerMethod method);
const char* to_string(StopReason reason);
OptimizerMethod optimizer_method_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::AdaptiveNelderMead;
  double xatol = 1e-8;
  double fatol = 1e-8;
  long max_fom_evals = 10000;
  /// Empty means unbounded; otherwise one entry per parameter.
  std::vector<double> lower;
  std::vector<double> upper;
  std::optional<double> target;
  /// Wall-clock budget per run; exhaustion stops with TimeBudget.
  std::optional<double> max_seconds;
  std::uint64_t seed = 0;

  // Quasi-Newton only.
  int history = 10;
  double pgtol = 1e-10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_evals = 25;

  // Nelder-Mead only: absolute initial simplex step overriding the 5% rule.
  std::optional<double> initial_step;

  void validate(std::size_t n_params) const;
  bool bounded() const { return !lower.empty(); }
};

struct TracePoint {
  long evaluations = 0;
  double best_fom = 0.0;
};

struct OptimizationRun {
  std::vector<double> best_params;
  double best_fom = 0.0;
  long fom_evaluations = 0;
  StopReason stop_reason = StopReason::Tolerance;
  std::vector<TracePoint> trace;
  double wall_time = 0.0;
  long iterations = 0;
};

using Objective = std::function<double(std::span<const double>)>;
/// Returns the value and writes the gradient; one call counts as one evaluation.
using ValueAndGradient = std::function<double(std::span<const double>, std::span<double>)>;

OptimizationRun nelder_mead(const Objective& objective, std::span<const double> x0,
                            const OptimizerConfig& config);

OptimizationRun quasi_newton(const ValueAndGradient& objective, std::span<const double> x0,
                             const OptimizerConfig& config);

struct DcrabConfig {
  double total_time = 1.0;
  int time_steps = 100;
  int n_superiterations = 3;
  int basis_size = 10;  // new coefficients per super-iteration
  double bandwidth = 1.0;
  double coefficient_step = 0.1;  // initial simplex step for coefficients
};

struct DcrabRun {
  OptimizationRun run;                  // best_params holds the final sampled field
  std::vector<double> superiteration_start;  // FoM at the start of each super-iteration
  std::vector<double> superiteration_best;
};

DcrabRun dcrab_driver(const ControlSystem& sys, const FigureOfMerit& fom,
                      const DcrabConfig& dcrab, const OptimizerConfig& config);

}  // namespace rally
