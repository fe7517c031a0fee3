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

// Numerical thresholds shared by all modules.
namespace rally::tol {

inline constexpr double kHermitian = 1e-12;
inline constexpr double kUnitary = 1e-10;
inline constexpr double kNorm = 1e-12;
inline constexpr double kReconstruction = 1e-10;
// Relative gap below which two eigenvalues are treated as degenerate when
// evaluating divided differences of the exponential.
inline constexpr double kConfluent = 1e-12;
inline constexpr double kDlaIndependence = 1e-10;
inline constexpr double kMinAtomDistanceUm = 5.0;
inline constexpr double kFiniteDifferenceStep = 1e-6;

}  // namespace rally::tol
