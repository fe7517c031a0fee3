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

#include <nlohmann/json.hpp>
#include <string>

#include "rally/analysis.hpp"
#include "rally/optimizers.hpp"
#include "rally/pulses.hpp"

namespace rally {

/// Object keys are sorted, so dumps are byte-stable.
using Json = nlohmann::json;

Json to_json(const PulseSequence& seq);
PulseSequence sequence_from_json(const Json& j);

Json to_json(const RiseProfile& profile);
RiseProfile rise_profile_from_json(const Json& j);

/// Run record without wall time unless `with_timing` is set.
Json to_json(const OptimizationRun& run, bool with_timing = false);

Json to_json(const MomentEstimate& e);
Json to_json(const DlaReport& r);
Json to_json(const RobustnessReport& r);

/// Bit-exact double round trip through text.
std::string format_double(double value);

}  // namespace rally
