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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "rally/hamiltonians.hpp"
#include "rally/qcore.hpp"

namespace rally {

enum class SequenceKind { RallyT, RallyA, Grape, Dcrab };

const char* to_string(SequenceKind kind);
SequenceKind sequence_kind_from_string(const std::string& name);

/// Sigmoid ramp between two amplitudes, modelling finite control bandwidth.
struct RiseProfile {
  double tau_rise = 10.0;
  int n_int = 100;
  double epsilon = 1e-10;

  void validate() const;
  /// Steepness k = (2 / tau_rise) ln((1 - eps) / eps).
  double steepness() const;
  /// Ramp value at time t in [0, tau_rise] for a jump u_from -> u_to.
  double value(double u_from, double u_to, double t) const;
};

/// Where ramps are inserted in a bandwidth-limited RALLY_T schedule.
enum class RiseInsertion {
  AtJumps,        ///< only between adjacent pulses whose amplitudes differ
  EveryBoundary,  ///< between every pair of adjacent pulses
};

/// Layered piecewise-constant control schedule.
///
/// The random amplitudes are drawn once at construction and never change.
/// Parameters are the layer durations (RallyT), the layer scale factors
/// (RallyA) or the per-step amplitudes (Grape, Dcrab). Layer 1 acts first on
/// the state: the total propagator is U_{N_L} ... U_1.
struct PulseSequence {
  SequenceKind kind = SequenceKind::RallyT;
  int n_layers = 0;
  int layer_size = 1;
  Eigen::MatrixXd amplitudes;  // n_layers x layer_size; empty for Grape/Dcrab
  std::vector<double> params;
  double dt = 0.0;
  std::optional<RiseProfile> rise;
  RiseInsertion rise_insertion = RiseInsertion::AtJumps;
  bool enforce_amplitude_bounds = true;
  std::uint64_t seed = 0;

  /// Amplitudes drawn from `domain` with Rng(seed); durations start at zero.
  static PulseSequence rally_t(const AmplitudeDomain& domain, int n_layers, int layer_size,
                               std::uint64_t seed);
  /// Amplitudes drawn from `domain` with Rng(seed); scale factors start at one.
  static PulseSequence rally_a(const AmplitudeDomain& domain, int n_layers, int layer_size,
                               double dt, std::uint64_t seed);
  static PulseSequence grape(std::vector<double> amplitudes, double dt);

  int pulse_count() const;
  /// Amplitude actually applied during pulse (layer, p).
  double effective_amplitude(int layer, int p) const;
  /// Duration of every pulse in `layer`.
  double pulse_duration(int layer) const;
  /// sum tau for RallyT; n_layers * layer_size * dt otherwise. Ramps excluded.
  double total_duration() const;
};

/// Eigendecompositions of H0 + u Hc keyed by the exact bit pattern of u, and
/// ramp propagators keyed by (u_from, u_to, profile).
///
/// Population is single-writer; once built, const lookups may run
/// concurrently.
class PropagatorCache {
 public:
  std::shared_ptr<const EigenSystem> eigensystem(const ControlSystem& sys, double u);
  std::shared_ptr<const OperatorMatrix> rise(const ControlSystem& sys, double u_from, double u_to,
                                             const RiseProfile& profile);

  std::shared_ptr<const EigenSystem> find_eigensystem(double u) const;
  std::shared_ptr<const OperatorMatrix> find_rise(double u_from, double u_to,
                                                  const RiseProfile& profile) const;

  /// Populates every entry `seq` needs, including ramps when it has a profile.
  void prepare(const ControlSystem& sys, const PulseSequence& seq);

  std::size_t eigensystem_count() const { return eigen_.size(); }
  std::size_t rise_count() const { return rises_.size(); }

 private:
  using RiseKey = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, int, std::uint64_t>;
  static RiseKey rise_key(double u_from, double u_to, const RiseProfile& profile);

  std::unordered_map<std::uint64_t, std::shared_ptr<const EigenSystem>> eigen_;
  std::map<RiseKey, std::shared_ptr<const OperatorMatrix>> rises_;
};

/// How a segment of a compiled schedule depends on the parameter vector.
enum class SegmentRole {
  Constant,      ///< ramp or otherwise parameter-free
  Duration,      ///< duration = param * weight (RallyT: weight = 1/N_P)
  ControlScale,  ///< amplitude = param * weight (RallyA: weight = u; Grape: 1)
};

/// One constant-Hamiltonian step, or a precomputed fixed unitary.
struct Segment {
  std::shared_ptr<const EigenSystem> eigensystem;  // null for fixed segments
  std::shared_ptr<const OperatorMatrix> fixed;     // null for exponential segments
  double duration = 0.0;
  double amplitude = 0.0;
  SegmentRole role = SegmentRole::Constant;
  int param = -1;
  double weight = 0.0;

  OperatorMatrix matrix() const;
  StateVector apply(const StateVector& psi) const;
  /// U^dagger psi.
  StateVector apply_adjoint(const StateVector& psi) const;
};

/// A pulse sequence flattened into time order (first segment acts first).
struct Schedule {
  int dim = 0;
  int n_params = 0;
  std::vector<Segment> segments;

  OperatorMatrix propagator() const;
  StateVector evolve(const StateVector& psi) const;
  /// Physical duration including ramps.
  double total_time() const;
};

/// Flattens `seq` against `sys`, validating constraints. Eigendecompositions
/// are taken from `cache` when present there and computed on a miss.
Schedule compile(const ControlSystem& sys, const PulseSequence& seq,
                 const PropagatorCache* cache = nullptr);

/// prod_l prod_p exp[-i (tau_l/N_P)(H0 + u^{(l,p)} Hc)], ramps inserted if the
/// sequence carries a rise profile.
OperatorMatrix rally_t_propagator(const ControlSystem& sys, const PulseSequence& seq,
                                  const PropagatorCache* cache = nullptr);

/// prod_l prod_p exp[-i dt (H0 + xi_l u^{(l,p)} Hc)].
OperatorMatrix rally_a_propagator(const ControlSystem& sys, const PulseSequence& seq);

/// U_M ... U_1 with U_j = exp(-i dt (H0 + u[j] Hc)).
OperatorMatrix grape_propagator(const ControlSystem& sys, std::span<const double> amplitudes,
                                double dt);

/// prod_n exp[-i (tau_rise/n_int) H(u_n)] with u_n the ramp at interval
/// midpoints.
OperatorMatrix rise_propagator(const ControlSystem& sys, double u_from, double u_to,
                               const RiseProfile& profile);

/// RALLY_T with ramps between pulses. Ramps add to the optimized durations.
OperatorMatrix rally_t_with_bandwidth(const ControlSystem& sys, const PulseSequence& seq,
                                      const RiseProfile& profile,
                                      const PropagatorCache* cache = nullptr);

/// Dispatches on seq.kind.
OperatorMatrix propagator(const ControlSystem& sys, const PulseSequence& seq,
                          const PropagatorCache* cache = nullptr);

/// Randomised truncated Fourier basis {cos(w_i t), sin(w_i t)}.
struct FourierBasis {
  std::vector<double> frequencies;
  int count = 0;  // number of basis functions; the last sine is dropped if odd

  /// `count` functions with frequencies uniform in (0, bandwidth].
  static FourierBasis random(int count, double bandwidth, Rng& rng);
  double value(int index, double t) const;
};

/// Midpoints of M equal steps covering [0, total_time].
std::vector<double> time_grid(double total_time, int steps);

/// u(t) = c0 * previous(t) + sum_i c_i phi_i(t) on `times`, then clipped to
/// `clip` if given. An empty `previous` is the zero field.
std::vector<double> dcrab_field(double c0, std::span<const double> coeffs,
                                const FourierBasis& basis, std::span<const double> previous,
                                std::span<const double> times,
                                const AmplitudeDomain* clip = nullptr);

}  // namespace rally
