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

#include <chrono>
#include <limits>

#include "rally/errors.hpp"
#include "rally/optimizers.hpp"

namespace rally {

DcrabRun dcrab_driver(const ControlSystem& sys, const FigureOfMerit& fom,
                      const DcrabConfig& dcrab, const OptimizerConfig& config) {
  if (dcrab.n_superiterations < 1) throw ConfigError("dcrab: need at least one super-iteration");
  if (dcrab.time_steps < 1 || !(dcrab.total_time > 0.0)) {
    throw ConfigError("dcrab: time grid must be non-empty with positive total time");
  }
  if (dcrab.basis_size < 1) throw ConfigError("dcrab: basis_size must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> times = time_grid(dcrab.total_time, dcrab.time_steps);
  const double dt = dcrab.total_time / dcrab.time_steps;
  Rng rng(config.seed);

  DcrabRun out;
  OptimizationRun& total = out.run;
  total.best_fom = std::numeric_limits<double>::infinity();
  std::vector<double> previous;

  auto field_fom = [&](const std::vector<double>& field) {
    PulseSequence seq = PulseSequence::grape(field, dt);
    seq.kind = SequenceKind::Dcrab;
    seq.enforce_amplitude_bounds = false;
    return fom.evaluate(compile(sys, seq));
  };

  for (int j = 0; j < dcrab.n_superiterations; ++j) {
    const FourierBasis basis = FourierBasis::random(dcrab.basis_size, dcrab.bandwidth, rng);
    const bool dressed = !previous.empty();
    auto field_of = [&](std::span<const double> p) {
      const double c0 = dressed ? p[0] : 0.0;
      return dcrab_field(c0, p.subspan(dressed ? 1 : 0), basis, previous, times,
                         &sys.amplitudes);
    };

    std::vector<double> x0(dcrab.basis_size + (dressed ? 1 : 0), 0.0);
    if (dressed) x0[0] = 1.0;

    OptimizerConfig sub = config;
    sub.method = OptimizerMethod::AdaptiveNelderMead;
    sub.lower.clear();
    sub.upper.clear();
    sub.initial_step = dcrab.coefficient_step;
    const long remaining = config.max_fom_evals - total.fom_evaluations;
    sub.max_fom_evals = std::max(1L, remaining / (dcrab.n_superiterations - j));
    if (remaining <= 0) break;

    const OptimizationRun run =
        nelder_mead([&](std::span<const double> p) { return field_fom(field_of(p)); }, x0, sub);

    out.superiteration_start.push_back(run.trace.front().best_fom);
    out.superiteration_best.push_back(run.best_fom);
    for (const TracePoint& tp : run.trace) {
      const double best = std::min(total.best_fom, tp.best_fom);
      if (total.trace.empty() || best < total.trace.back().best_fom) {
        total.trace.push_back({total.fom_evaluations + tp.evaluations, best});
      }
      total.best_fom = best;
    }
    total.fom_evaluations += run.fom_evaluations;
    total.iterations += run.iterations;
    total.stop_reason = run.stop_reason;

    previous = field_of(run.best_params);
    total.best_params = previous;
    if (run.stop_reason == StopReason::TargetReached) break;
  }
  if (total.trace.empty() || total.trace.back().evaluations != total.fom_evaluations) {
    total.trace.push_back({total.fom_evaluations, total.best_fom});
  }
  total.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace rally
