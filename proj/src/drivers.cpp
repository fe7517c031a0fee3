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

#include "rally/drivers.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "rally/errors.hpp"

namespace rally {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PulseSequence initial_sequence(const ControlSystem& sys, const SolveSpec& spec) {
  if (spec.n_layers < 1 || spec.layer_size < 1) {
    throw ConfigError("solve: n_layers and layer_size must be positive");
  }
  Rng init = substream(spec.seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::uint64_t amp_seed = substream(spec.seed, 0)();

  switch (spec.method) {
    case SequenceKind::RallyT: {
      PulseSequence seq =
          PulseSequence::rally_t(sys.amplitudes, spec.n_layers, spec.layer_size, amp_seed);
      seq.rise = spec.rise;
      seq.rise_insertion = spec.rise_insertion;
      const double lo = spec.layer_size * sys.min_pulse_duration;
      double total = 0.0;
      for (double& tau : seq.params) {
        tau = spec.tau_init_max * unit(init);
        total += tau;
      }
      if (spec.initial_total && total > 0.0) {
        for (double& tau : seq.params) tau *= *spec.initial_total / total;
      }
      for (double& tau : seq.params) tau = std::clamp(tau, lo, std::max(lo, spec.tau_max));
      return seq;
    }
    case SequenceKind::RallyA: {
      PulseSequence seq = PulseSequence::rally_a(sys.amplitudes, spec.n_layers, spec.layer_size,
                                                 spec.dt, amp_seed);
      for (double& xi : seq.params) xi = unit(init);
      return seq;
    }
    case SequenceKind::Grape: {
      std::vector<double> amps(spec.n_layers);
      std::uniform_real_distribution<double> dist(sys.amplitudes.lower(), sys.amplitudes.upper());
      for (double& u : amps) u = dist(init);
      return PulseSequence::grape(std::move(amps), spec.dt);
    }
    case SequenceKind::Dcrab: {
      PulseSequence seq = PulseSequence::grape(
          std::vector<double>(spec.dcrab.time_steps, 0.0),
          spec.dcrab.total_time / spec.dcrab.time_steps);
      seq.kind = SequenceKind::Dcrab;
      seq.enforce_amplitude_bounds = false;
      return seq;
    }
  }
  throw ConfigError("solve: unknown method");
}

SolveResult solve(const ControlSystem& sys, const FigureOfMerit& fom, const SolveSpec& spec,
                  const OptimizerConfig& config) {
  SolveResult out;
  const auto t0 = std::chrono::steady_clock::now();

  if (spec.method == SequenceKind::Dcrab) {
    OptimizerConfig cfg = config;
    cfg.seed = spec.seed;
    DcrabRun d = dcrab_driver(sys, fom, spec.dcrab, cfg);
    out.sequence = initial_sequence(sys, spec);
    out.sequence.params = d.run.best_params;
    out.run = std::move(d.run);
    out.final_fom = out.run.best_fom;
    out.total_duration = spec.dcrab.total_time;
    return out;
  }

  PulseSequence seq = initial_sequence(sys, spec);
  const std::size_t n = seq.params.size();

  OptimizerConfig cfg = config;
  cfg.seed = spec.seed;
  switch (spec.method) {
    case SequenceKind::RallyT:
      cfg.lower.assign(n, spec.layer_size * sys.min_pulse_duration);
      cfg.upper.assign(n, std::max(cfg.lower[0], spec.tau_max));
      break;
    case SequenceKind::RallyA:
      cfg.lower.assign(n, 0.0);
      cfg.upper.assign(n, 1.0);
      break;
    default:
      cfg.lower.assign(n, sys.amplitudes.lower());
      cfg.upper.assign(n, sys.amplitudes.upper());
      break;
  }

  PropagatorCache cache;
  if (spec.method == SequenceKind::RallyT) cache.prepare(sys, seq);
  out.preprocessing_seconds = seconds_since(t0);

  PulseSequence work = seq;
  auto set_params = [&](std::span<const double> x) { work.params.assign(x.begin(), x.end()); };

  if (cfg.method == OptimizerMethod::AdaptiveNelderMead) {
    out.run = nelder_mead(
        [&](std::span<const double> x) {
          set_params(x);
          return evaluate_sequence(sys, work, fom, &cache);
        },
        seq.params, cfg);
  } else {
    out.run = quasi_newton(
        [&](std::span<const double> x, std::span<double> g) {
          set_params(x);
          GradientResult r;
          switch (spec.method) {
            case SequenceKind::RallyT:
              r = rally_t_gradient(sys, work, fom, &cache);
              break;
            case SequenceKind::RallyA:
              r = rally_a_gradient(sys, work, fom);
              break;
            default:
              r = grape_gradient(sys, work.params, work.dt, fom, spec.frechet);
              break;
          }
          std::copy(r.values.begin(), r.values.end(), g.begin());
          return r.value;
        },
        seq.params, cfg);
  }

  out.sequence = seq;
  out.sequence.params = out.run.best_params;
  out.final_fom = fom.evaluate(compile(sys, out.sequence, &cache));
  out.total_duration = out.sequence.total_duration();
  return out;
}

}  // namespace rally
