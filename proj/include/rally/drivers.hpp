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

// End-to-end solves: sequence construction, seeded initialization, bounds,
// objective wiring and optimizer dispatch for every sequence kind.

#pragma once

#include <cstdint>
#include <optional>

#include "rally/fom.hpp"
#include "rally/gradients.hpp"
#include "rally/optimizers.hpp"
#include "rally/pulses.hpp"

namespace rally {

struct SolveSpec {
  SequenceKind method = SequenceKind::RallyT;
  int n_layers = 1;     // GRAPE: number of time steps
  int layer_size = 1;   // forced to 1 for GRAPE
  double dt = 0.1;      // RALLY_A / GRAPE step
  double tau_init_max = 1.0;  // RALLY_T: initial tau uniform in [0, tau_init_max]
  double tau_max = 10.0;      // RALLY_T: upper bound per layer
  std::optional<double> initial_total;  // RALLY_T: rescale the initial durations to this sum
  std::optional<RiseProfile> rise;
  RiseInsertion rise_insertion = RiseInsertion::AtJumps;
  FrechetMode frechet = FrechetMode::Exact;
  DcrabConfig dcrab;
  std::uint64_t seed = 0;
};

struct SolveResult {
  OptimizationRun run;
  PulseSequence sequence;  // parameters set to the best point found
  double final_fom = 0.0;  // without the duration penalty
  double total_duration = 0.0;
  double preprocessing_seconds = 0.0;
};

/// Draws the frozen amplitudes and the start point from substreams of spec.seed.
PulseSequence initial_sequence(const ControlSystem& sys, const SolveSpec& spec);

SolveResult solve(const ControlSystem& sys, const FigureOfMerit& fom, const SolveSpec& spec,
                  const OptimizerConfig& config);

}  // namespace rally
