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

#include <functional>
#include <span>
#include <vector>

#include "rally/fom.hpp"
#include "rally/pulses.hpp"

namespace rally {

enum class GradientMethod { AnalyticExact, AnalyticFirstOrder, FiniteDifference };

/// How dU/du is formed for amplitude parameters.
enum class FrechetMode { Exact, FirstOrder };

struct GradientResult {
  std::vector<double> values;
  GradientMethod method = GradientMethod::AnalyticExact;
  double value = 0.0;  // FoM at the expansion point, penalty included
};

/// Adjoint gradient of `fom` with respect to the schedule parameters.
/// Constant segments (ramps) enter the products but carry no derivative.
GradientResult schedule_gradient(const Schedule& schedule, const FigureOfMerit& fom,
                                 const OperatorMatrix& control,
                                 FrechetMode mode = FrechetMode::Exact);

/// Layer-duration gradient. Bandwidth ramps are treated as constants.
GradientResult rally_t_gradient(const ControlSystem& sys, const PulseSequence& seq,
                                const FigureOfMerit& fom, const PropagatorCache* cache = nullptr);

GradientResult rally_a_gradient(const ControlSystem& sys, const PulseSequence& seq,
                                const FigureOfMerit& fom);

GradientResult grape_gradient(const ControlSystem& sys, std::span<const double> amplitudes,
                              double dt, const FigureOfMerit& fom,
                              FrechetMode mode = FrechetMode::Exact);

/// Central differences with step h * max(1, |x_i|).
GradientResult finite_difference(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> params, double h = 1e-6);

/// Divided differences of exp(-i dt lambda); entry (a, b) is the Frechet kernel.
OperatorMatrix frechet_kernel(const RealVector& eigenvalues, double dt);

}  // namespace rally
