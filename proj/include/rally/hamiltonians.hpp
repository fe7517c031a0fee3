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

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rally/qcore.hpp"

namespace rally {

/// Allowed control amplitudes: a closed interval or a finite set of values.
/// A finite set may additionally carry the hardware interval it must respect.
class AmplitudeDomain {
 public:
  static AmplitudeDomain interval(double lo, double hi);
  static AmplitudeDomain discrete(std::vector<double> values,
                                  std::optional<std::pair<double, double>> bound = std::nullopt);

  bool is_discrete() const { return discrete_; }
  const std::vector<double>& values() const { return values_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }

  bool contains(double u, double slack = 0.0) const;
  /// Projection onto [lower, upper].
  double clamp(double u) const;
  /// Uniform over the interval, or uniform over the finite set.
  double sample(Rng& rng) const;

 private:
  AmplitudeDomain() = default;
  bool discrete_ = false;
  double lo_ = -1.0;
  double hi_ = 1.0;
  std::vector<double> values_;
};

/// H(t) = drift + u(t) control, plus the admissible control amplitudes.
struct ControlSystem {
  OperatorMatrix drift;
  OperatorMatrix control;
  AmplitudeDomain amplitudes = AmplitudeDomain::interval(-1.0, 1.0);
  double min_pulse_duration = 0.0;
  std::string unit_note;

  int dim() const { return static_cast<int>(drift.rows()); }
  OperatorMatrix hamiltonian(double u) const { return drift + u * control; }

  /// Checks shapes, Hermiticity and the amplitude-domain invariants.
  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Two-dimensional Rydberg array with a global drive.
///
/// Units: positions in micrometres; energies in rad/us, numerically equal to
/// the MHz figures quoted for the hardware, so C6 = 5420 GHz um^6 becomes
/// 5.42e6 in these units.
struct RydbergGeometry {
  std::vector<Point2> positions;
  double rabi_frequency = 1.0;
  double c6 = 5420e3;

  int size() const { return static_cast<int>(positions.size()); }
  double distance(int i, int j) const;
  /// C6 / r_ij^6.
  double coupling(int i, int j) const;
  /// Throws GeometryViolation for an empty array or atoms closer than 5 um.
  void validate() const;
};

/// Open Ising chain: drift = sum hx_i X_i + hz_i Z_i, control = sum X_i X_{i+1}.
ControlSystem build_ising(int n, std::span<const double> hx, std::span<const double> hz,
                          AmplitudeDomain amplitudes = AmplitudeDomain::interval(-1.0, 1.0));

/// Draws hx, hz uniformly from [lo, hi].
std::pair<std::vector<double>, std::vector<double>> random_ising_fields(int n, Rng& rng,
                                                                        double lo = 0.5,
                                                                        double hi = 1.0);

/// drift = sum J_ij n_i n_j + Omega sum X_i, control = -sum Z_i (detuning).
/// Detuning bounded to [-10, 10] and pulses to at least 4 ns.
ControlSystem build_rydberg(const RydbergGeometry& geometry);

/// Target Hamiltonian from a Pauli-term file. `n` = 0 infers the site count.
OperatorMatrix load_molecular_hamiltonian(const std::string& path, int n = 0);

/// CSV of `x_um,y_um` rows. Header comments `# rabi_frequency: <v>` and
/// `# c6: <v>` override the defaults.
RydbergGeometry read_geometry_csv(const std::string& path);
void write_geometry_csv(const std::string& path, const RydbergGeometry& geometry);

/// Three-atom layout used for the CNOT synthesis benchmark.
RydbergGeometry cnot_geometry();
/// Rhombus used for the H2 ground state; it respects the 0<->2, 1<->3
/// exchange symmetry of the Jordan-Wigner Hamiltonian.
RydbergGeometry h2_rhombus_geometry();

}  // namespace rally
