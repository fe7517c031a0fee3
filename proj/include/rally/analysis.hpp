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
#include <span>
#include <string>
#include <vector>

#include "rally/drivers.hpp"
#include "rally/fom.hpp"
#include "rally/hamiltonians.hpp"
#include "rally/pulses.hpp"

namespace rally {

// ---- Haar moments ---------------------------------------------------------

struct MomentEstimate {
  int t = 1;
  double frame_potential = 0.0;
  double delta = 0.0;       // |F - t!|
  long pairs = 0;
  double sigma_t = 0.0;     // Haar standard deviation of |tr(U^dagger V)|^{2t}
  double plateau = 0.0;     // sigma_t / sqrt(pairs)
  double sample_sigma = 0.0;
};

/// Haar standard deviation for orders 1..4.
double haar_sigma(int t);

using UnitarySampler = std::function<OperatorMatrix(Rng&)>;

/// One pass over `pairs` sampled pairs, reporting every requested order.
/// Pairs are split into fixed chunks on substreams of `seed`, so the result
/// does not depend on `workers`.
std::vector<MomentEstimate> moment_gaps(const UnitarySampler& sampler, std::span<const int> orders,
                                        long pairs, std::uint64_t seed, int workers = 1);

MomentEstimate moment_gap(const UnitarySampler& sampler, int t, long pairs, std::uint64_t seed,
                          int workers = 1);

UnitarySampler haar_sampler(int dim);

/// RALLY_T ensemble: amplitudes from the system's domain, durations uniform in [0, tau_max].
UnitarySampler rally_t_sampler(const ControlSystem& sys, int n_layers, int layer_size,
                               double tau_max = 10.0);

/// Same ensemble with the amplitudes of `frozen` held fixed; only durations vary.
UnitarySampler rally_t_duration_sampler(const ControlSystem& sys, const PulseSequence& frozen,
                                        double tau_max = 10.0);

MomentEstimate moment_gap_fixed_amplitudes(const ControlSystem& sys, const PulseSequence& frozen,
                                           int t, long pairs, std::uint64_t seed,
                                           int workers = 1, double tau_max = 10.0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// ---- Controllability --------------------------------------------------------

struct DlaReport {
  int dim_found = 0;
  int dim_full = 0;
  bool controllable = false;
  double basis_residual = 0.0;  // largest re-orthogonalization coefficient seen
};

DlaReport dla_rank(const OperatorMatrix& drift, const OperatorMatrix& control);
DlaReport dla_rank(const ControlSystem& sys);

enum class ControlTask { StateTransfer, UnitarySynthesis };

long parameter_bound(ControlTask task, long dim);

// ---- Robustness -------------------------------------------------------------

/// PerLayer: one duration error per layer, shared by its pulses (delta tau / N_P each).
/// PerPulse: an independent duration error on every pulse.
enum class DurationNoise { PerLayer, PerPulse };

struct RobustnessReport {
  double sigma_u = 0.0;
  double sigma_tau = 0.0;
  double mean_delta_j = 0.0;
  double bound = 0.0;  // bound on E|Delta J|, i.e. twice the propagator bound
  long samples = 0;
  double nominal_fom = 0.0;
};

/// Bound on E|Delta J| for RALLY_T or GRAPE sequences under the given noise model.
double robustness_bound(const ControlSystem& sys, const PulseSequence& seq, double sigma_u,
                        double sigma_tau, DurationNoise noise = DurationNoise::PerLayer);

RobustnessReport robustness_study(const ControlSystem& sys, const PulseSequence& seq,
                                  const FigureOfMerit& fom, double sigma_u, double sigma_tau,
                                  long n_samples, Rng& rng,
                                  DurationNoise noise = DurationNoise::PerLayer);

// ---- Runtime scaling --------------------------------------------------------

struct ScalingPoint {
  int n_qubits = 0;
  int dimension = 0;
  std::vector<double> seconds;          // preprocessing + optimization, per seed
  std::vector<double> preprocessing;    // per seed
  std::vector<long> evaluations;        // per seed
  std::vector<double> final_fom;        // per seed
  double median_seconds = 0.0;
  double success_fraction = 0.0;
};

struct ScalingReport {
  std::string method;
  std::vector<ScalingPoint> points;
  LinearFit fit;  // log(median seconds) vs log(dimension), largest four points
};

/// Problem factory: (qubits, seed) -> system and figure of merit.
using ProblemFactory =
    std::function<std::pair<ControlSystem, FigureOfMerit>(int n, std::uint64_t seed)>;
/// Solve settings for a given qubit count.
using SpecFactory = std::function<SolveSpec(int n)>;

ScalingReport scaling_study(const ProblemFactory& problem, const SpecFactory& spec,
                            const OptimizerConfig& config, std::span<const int> qubit_counts,
                            std::span<const std::uint64_t> seeds, double target_fom,
                            double budget_seconds);

/// Ising chain with seeded fields in [0.5, 1] and the |0..0> -> GHZ state-transfer FoM.
std::pair<ControlSystem, FigureOfMerit> ising_ghz_problem(int n, std::uint64_t seed,
                                                          bool discrete_amplitudes);

double median(std::vector<double> values);

}  // namespace rally
