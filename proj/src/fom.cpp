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

#include "rally/fom.hpp"

#include <cmath>
#include <string>

#include "rally/errors.hpp"
#include "rally/tolerances.hpp"

namespace rally {

const char* to_string(FomKind kind) {
  switch (kind) {
    case FomKind::UnitaryInfidelity:
      return "unitary_infidelity";
    case FomKind::StateInfidelity:
      return "state_infidelity";
    case FomKind::Energy:
      return "energy";
  }
  return "unknown";
}

namespace {

void require_same(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

}  // namespace

FigureOfMerit FigureOfMerit::unitary(OperatorMatrix target) {
  if (target.rows() != target.cols()) throw DimensionMismatch("unitary target is not square");
  FigureOfMerit f;
  f.kind = FomKind::UnitaryInfidelity;
  f.target_unitary = std::move(target);
  return f;
}

FigureOfMerit FigureOfMerit::state(StateVector initial, StateVector target) {
  require_same(initial.size(), target.size(), "state FoM");
  FigureOfMerit f;
  f.kind = FomKind::StateInfidelity;
  f.initial_state = std::move(initial);
  f.target_state = std::move(target);
  return f;
}

FigureOfMerit FigureOfMerit::energy(StateVector initial, OperatorMatrix hamiltonian) {
  require_same(initial.size(), hamiltonian.rows(), "energy FoM");
  require_same(hamiltonian.rows(), hamiltonian.cols(), "energy FoM");
  if (!is_hermitian(hamiltonian, tol::kHermitian)) {
    throw NonHermitianInput("energy FoM: target Hamiltonian is not Hermitian");
  }
  FigureOfMerit f;
  f.kind = FomKind::Energy;
  f.initial_state = std::move(initial);
  f.observable = std::move(hamiltonian);
  return f;
}

int FigureOfMerit::dim() const {
  return static_cast<int>(kind == FomKind::UnitaryInfidelity ? target_unitary.rows()
                                                             : initial_state.size());
}

double FigureOfMerit::evaluate(const OperatorMatrix& u) const {
  switch (kind) {
    case FomKind::UnitaryInfidelity:
      return unitary_infidelity(u, target_unitary);
    case FomKind::StateInfidelity:
      return state_infidelity(initial_state, u, target_state);
    case FomKind::Energy:
      return rally::energy(initial_state, u, observable);
  }
  return 0.0;
}

double FigureOfMerit::evaluate(const Schedule& schedule) const {
  require_same(schedule.dim, dim(), "FoM evaluation");
  if (!state_based()) return evaluate(schedule.propagator());
  return evaluate_final_state(schedule.evolve(initial_state));
}

double FigureOfMerit::evaluate_final_state(const StateVector& psi) const {
  require_same(psi.size(), dim(), "FoM evaluation");
  if (kind == FomKind::StateInfidelity) {
    return 1.0 - std::norm(target_state.dot(psi));
  }
  if (kind == FomKind::Energy) {
    return psi.dot(observable * psi).real();
  }
  throw UnsupportedSequence("unitary infidelity needs the full propagator");
}

double unitary_infidelity(const OperatorMatrix& u, const OperatorMatrix& target) {
  require_same(u.rows(), target.rows(), "unitary_infidelity");
  require_same(u.cols(), target.cols(), "unitary_infidelity");
  const double n = static_cast<double>(u.rows());
  // Tr(T^dagger U) = sum conj(T_ij) U_ij
  const Complex g = (target.conjugate().cwiseProduct(u)).sum();
  return 1.0 - std::norm(g) / (n * n);
}

double state_infidelity(const StateVector& psi0, const OperatorMatrix& u,
                        const StateVector& target) {
  require_same(psi0.size(), u.cols(), "state_infidelity");
  require_same(target.size(), u.rows(), "state_infidelity");
  return 1.0 - std::norm(target.dot(u * psi0));
}

double energy(const StateVector& psi0, const OperatorMatrix& u, const OperatorMatrix& h_target) {
  require_same(psi0.size(), u.cols(), "energy");
  require_same(h_target.rows(), u.rows(), "energy");
  const StateVector psi = u * psi0;
  return psi.dot(h_target * psi).real();
}

double composite(double fom_value, std::span<const double> durations, double lambda) {
  if (lambda < 0.0) throw ConstraintViolation("composite: penalty weight must be >= 0");
  double total = 0.0;
  for (double tau : durations) total += tau;
  return fom_value + lambda * total * total;
}

double evaluate_sequence(const ControlSystem& sys, const PulseSequence& seq,
                         const FigureOfMerit& fom, const PropagatorCache* cache) {
  const double value = fom.evaluate(compile(sys, seq, cache));
  if (seq.kind == SequenceKind::RallyT && fom.penalty_weight > 0.0) {
    return composite(value, seq.params, fom.penalty_weight);
  }
  return value;
}

OperatorMatrix cnot_target(int n, int control, int target) {
  if (n < 2 || n > 20) throw IndexOutOfRange("cnot_target: register size must be in [2, 20]");
  if (control < 0 || control >= n || target < 0 || target >= n || control == target) {
    throw IndexOutOfRange("cnot_target: invalid control/target sites");
  }
  const std::int64_t dim = std::int64_t{1} << n;
  OperatorMatrix u = OperatorMatrix::Zero(dim, dim);
  for (std::int64_t col = 0; col < dim; ++col) {
    const std::int64_t row = ((col >> control) & 1) ? col ^ (std::int64_t{1} << target) : col;
    u(row, col) = 1.0;
  }
  return u;
}

}  // namespace rally
