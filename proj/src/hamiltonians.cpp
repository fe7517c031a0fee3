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

#include "rally/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rally/errors.hpp"
#include "rally/tolerances.hpp"

namespace rally {

AmplitudeDomain AmplitudeDomain::interval(double lo, double hi) {
  if (!(lo <= hi)) throw ConstraintViolation("amplitude interval must satisfy lo <= hi");
  AmplitudeDomain d;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

AmplitudeDomain AmplitudeDomain::discrete(std::vector<double> values,
                                          std::optional<std::pair<double, double>> bound) {
  if (values.empty()) throw ConstraintViolation("discrete amplitude set is empty");
  AmplitudeDomain d;
  d.discrete_ = true;
  d.values_ = std::move(values);
  const auto [mn, mx] = std::minmax_element(d.values_.begin(), d.values_.end());
  d.lo_ = *mn;
  d.hi_ = *mx;
  if (bound) {
    if (d.lo_ < bound->first || d.hi_ > bound->second) {
      throw ConstraintViolation("discrete amplitudes exceed the declared bound");
    }
    d.lo_ = bound->first;
    d.hi_ = bound->second;
  }
  return d;
}

bool AmplitudeDomain::contains(double u, double slack) const {
  if (discrete_) {
    return std::any_of(values_.begin(), values_.end(),
                       [&](double v) { return std::abs(v - u) <= slack; });
  }
  return u >= lo_ - slack && u <= hi_ + slack;
}

double AmplitudeDomain::clamp(double u) const { return std::clamp(u, lo_, hi_); }

double AmplitudeDomain::sample(Rng& rng) const {
  if (discrete_) {
    std::uniform_int_distribution<std::size_t> pick(0, values_.size() - 1);
    return values_[pick(rng)];
  }
  std::uniform_real_distribution<double> uni(lo_, hi_);
  return uni(rng);
}

void ControlSystem::validate() const {
  if (drift.rows() != drift.cols() || control.rows() != control.cols() ||
      drift.rows() != control.rows() || drift.rows() == 0) {
    throw DimensionMismatch("control system: drift and control must be square of equal size");
  }
  if (!is_hermitian(drift, tol::kHermitian) || !is_hermitian(control, tol::kHermitian)) {
    throw NonHermitianInput("control system: drift and control must be Hermitian");
  }
  if (min_pulse_duration < 0.0) {
    throw ConstraintViolation("control system: negative minimum pulse duration");
  }
}

double RydbergGeometry::distance(int i, int j) const {
  return std::hypot(positions[i].x - positions[j].x, positions[i].y - positions[j].y);
}

double RydbergGeometry::coupling(int i, int j) const { return c6 / std::pow(distance(i, j), 6); }

void RydbergGeometry::validate() const {
  if (positions.empty()) throw GeometryViolation("geometry has no atoms");
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if (distance(i, j) < tol::kMinAtomDistanceUm) {
        std::ostringstream msg;
        msg << "atoms " << i << " and " << j << " are " << distance(i, j)
            << " um apart (minimum " << tol::kMinAtomDistanceUm << " um)";
        throw GeometryViolation(msg.str());
      }
    }
  }
}

namespace {

PauliString single(double c, int site, PauliAxis axis) { return {c, {{site, axis}}}; }

}  // namespace

ControlSystem build_ising(int n, std::span<const double> hx, std::span<const double> hz,
                          AmplitudeDomain amplitudes) {
  if (n < 1) throw LengthMismatch("build_ising: need at least one spin");
  if (static_cast<int>(hx.size()) != n || static_cast<int>(hz.size()) != n) {
    throw LengthMismatch("build_ising: field arrays must have length n");
  }
  std::vector<PauliString> drift;
  std::vector<PauliString> control;
  for (int i = 0; i < n; ++i) {
    drift.push_back(single(hx[i], i, PauliAxis::X));
    drift.push_back(single(hz[i], i, PauliAxis::Z));
  }
  for (int i = 0; i + 1 < n; ++i) {
    control.push_back({1.0, {{i, PauliAxis::X}, {i + 1, PauliAxis::X}}});
  }
  ControlSystem sys{pauli_expand(drift, n), pauli_expand(control, n), std::move(amplitudes), 0.0,
                    "dimensionless Ising units"};
  sys.validate();
  return sys;
}

std::pair<std::vector<double>, std::vector<double>> random_ising_fields(int n, Rng& rng, double lo,
                                                                        double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  std::vector<double> hx(n);
  std::vector<double> hz(n);
  for (int i = 0; i < n; ++i) {
    hx[i] = uni(rng);
    hz[i] = uni(rng);
  }
  return {hx, hz};
}

ControlSystem build_rydberg(const RydbergGeometry& geometry) {
  geometry.validate();
  const int n = geometry.size();
  const std::int64_t dim = std::int64_t{1} << n;

  // n_i n_j is diagonal: 1 iff both atoms are excited (bit set).
  OperatorMatrix interactions = OperatorMatrix::Zero(dim, dim);
  for (std::int64_t b = 0; b < dim; ++b) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!((b >> i) & 1)) continue;
      for (int j = i + 1; j < n; ++j) {
        if ((b >> j) & 1) e += geometry.coupling(i, j);
      }
    }
    interactions(b, b) = e;
  }
  std::vector<PauliString> drive;
  std::vector<PauliString> detuning;
  for (int i = 0; i < n; ++i) {
    drive.push_back(single(geometry.rabi_frequency, i, PauliAxis::X));
    detuning.push_back(single(-1.0, i, PauliAxis::Z));
  }
  ControlSystem sys{interactions + pauli_expand(drive, n), pauli_expand(detuning, n),
                    AmplitudeDomain::interval(-10.0, 10.0), 4e-3,
                    "rad/us (numerically MHz), time in us, lengths in um"};
  sys.validate();
  return sys;
}

OperatorMatrix load_molecular_hamiltonian(const std::string& path, int n) {
  const std::vector<PauliString> terms = read_pauli_file(path);
  const int sites = n > 0 ? n : pauli_site_count(terms);
  OperatorMatrix h = pauli_expand(terms, sites);
  if (!is_hermitian(h, tol::kHermitian)) {
    throw NonHermitianInput("molecular Hamiltonian '" + path + "' is not Hermitian");
  }
  return h;
}

RydbergGeometry read_geometry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open geometry file '" + path + "'");
  RydbergGeometry g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream hdr(line.substr(first + 1));
      std::string key;
      double value = 0.0;
      if (hdr >> key && hdr >> value) {
        if (key == "rabi_frequency:") g.rabi_frequency = value;
        if (key == "c6:") g.c6 = value;
      }
      continue;
    }
    if (line.find("x_um") != std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Point2 p;
    std::string rest;
    if (!(row >> p.x >> p.y) || (row >> rest)) {
      throw ParseError(lineno, "expected 'x_um,y_um'");
    }
    g.positions.push_back(p);
  }
  g.validate();
  return g;
}

void write_geometry_csv(const std::string& path, const RydbergGeometry& geometry) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write geometry file '" + path + "'");
  out << std::setprecision(17);
  out << "# rabi_frequency: " << geometry.rabi_frequency << "\n";
  out << "# c6: " << geometry.c6 << "\n";
  out << "x_um,y_um\n";
  for (const Point2& p : geometry.positions) out << p.x << ',' << p.y << '\n';
}

RydbergGeometry cnot_geometry() { return {{{-8.0, 0.0}, {0.0, 9.6}, {8.8, 0.0}}, 1.0, 5420e3}; }

RydbergGeometry h2_rhombus_geometry() {
  return {{{14.0, 0.0}, {0.0, 7.0}, {-14.0, 0.0}, {0.0, -7.0}}, 1.0, 5420e3};
}

}  // namespace rally
