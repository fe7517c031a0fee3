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

#include <span>

#include "rally/pulses.hpp"
#include "rally/qcore.hpp"

namespace rally {

enum class FomKind { UnitaryInfidelity, StateInfidelity, Energy };

const char* to_string(FomKind kind);

/// Objective bundle. `penalty_weight` turns the value into the time-penalized
/// composite for RALLY_T sequences; other kinds ignore it.
struct FigureOfMerit {
  FomKind kind = FomKind::UnitaryInfidelity;
  OperatorMatrix target_unitary;
  StateVector initial_state;
  StateVector target_state;
  OperatorMatrix observable;
  double penalty_weight = 0.0;

  static FigureOfMerit unitary(OperatorMatrix target);
  static FigureOfMerit state(StateVector initial, StateVector target);
  static FigureOfMerit energy(StateVector initial, OperatorMatrix hamiltonian);

  int dim() const;
  bool state_based() const { return kind != FomKind::UnitaryInfidelity; }

  /// Value for a full propagator (penalty not included).
  double evaluate(const OperatorMatrix& u) const;
  /// Value for a schedule; state-based kinds propagate a vector only.
  double evaluate(const Schedule& schedule) const;
  /// Value of a final state psi_K = U psi_0 (state-based kinds only).
  double evaluate_final_state(const StateVector& psi) const;
};

double unitary_infidelity(const OperatorMatrix& u, const OperatorMatrix& target);

double state_infidelity(const StateVector& psi0, const OperatorMatrix& u,
                        const StateVector& target);

double energy(const StateVector& psi0, const OperatorMatrix& u, const OperatorMatrix& h_target);

double composite(double fom_value, std::span<const double> durations, double lambda);

/// Figure of merit of a sequence, including the duration penalty for RALLY_T.
double evaluate_sequence(const ControlSystem& sys, const PulseSequence& seq,
                         const FigureOfMerit& fom, const PropagatorCache* cache = nullptr);

/// Permutation matrix of a CNOT on an n-qubit register (identity elsewhere).
OperatorMatrix cnot_target(int n, int control, int target);

}  // namespace rally
