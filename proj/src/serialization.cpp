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

#include "rally/serialization.hpp"

#include <charconv>
#include <cmath>

#include "rally/errors.hpp"

namespace rally {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

template <typename T>
T require(const Json& j, const char* key) {
  if (!j.contains(key)) throw SchemaMismatch(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("key '") + key + "': " + e.what());
  }
}

// JSON has no NaN/inf; they are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

Json to_json(const RiseProfile& profile) {
  return Json{{"tau_rise", profile.tau_rise}, {"n_int", profile.n_int},
              {"epsilon", profile.epsilon}};
}

RiseProfile rise_profile_from_json(const Json& j) {
  RiseProfile p;
  p.tau_rise = require<double>(j, "tau_rise");
  p.n_int = require<int>(j, "n_int");
  p.epsilon = require<double>(j, "epsilon");
  p.validate();
  return p;
}

Json to_json(const PulseSequence& seq) {
  Json amps = Json::array();
  for (Eigen::Index l = 0; l < seq.amplitudes.rows(); ++l) {
    Json row = Json::array();
    for (Eigen::Index p = 0; p < seq.amplitudes.cols(); ++p) row.push_back(seq.amplitudes(l, p));
    amps.push_back(std::move(row));
  }
  Json j{{"kind", to_string(seq.kind)},
         {"seed", seq.seed},
         {"n_layers", seq.n_layers},
         {"layer_size", seq.layer_size},
         {"amplitudes", std::move(amps)},
         {"params", seq.params},
         {"dt", seq.dt},
         {"enforce_amplitude_bounds", seq.enforce_amplitude_bounds},
         {"rise", nullptr}};
  if (seq.rise) {
    j["rise"] = to_json(*seq.rise);
    j["rise"]["insertion"] =
        seq.rise_insertion == RiseInsertion::AtJumps ? "at_jumps" : "every_boundary";
  }
  return j;
}

PulseSequence sequence_from_json(const Json& j) {
  PulseSequence seq;
  seq.kind = sequence_kind_from_string(require<std::string>(j, "kind"));
  seq.seed = require<std::uint64_t>(j, "seed");
  seq.n_layers = require<int>(j, "n_layers");
  seq.layer_size = require<int>(j, "layer_size");
  seq.params = require<std::vector<double>>(j, "params");
  seq.dt = require<double>(j, "dt");
  seq.enforce_amplitude_bounds = j.value("enforce_amplitude_bounds", true);
  const auto rows = require<std::vector<std::vector<double>>>(j, "amplitudes");
  if (!rows.empty()) {
    seq.amplitudes.resize(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t l = 0; l < rows.size(); ++l) {
      if (rows[l].size() != rows.front().size()) throw SchemaMismatch("ragged amplitude matrix");
      for (std::size_t p = 0; p < rows[l].size(); ++p) seq.amplitudes(l, p) = rows[l][p];
    }
  }
  if (j.contains("rise") && !j["rise"].is_null()) {
    seq.rise = rise_profile_from_json(j["rise"]);
    const std::string ins = j["rise"].value("insertion", "at_jumps");
    if (ins == "at_jumps") {
      seq.rise_insertion = RiseInsertion::AtJumps;
    } else if (ins == "every_boundary") {
      seq.rise_insertion = RiseInsertion::EveryBoundary;
    } else {
      throw SchemaMismatch("unknown rise insertion '" + ins + "'");
    }
  }
  return seq;
}

Json to_json(const OptimizationRun& run, bool with_timing) {
  Json trace = Json::array();
  for (const TracePoint& tp : run.trace) trace.push_back(Json::array({tp.evaluations, number(tp.best_fom)}));
  Json j{{"best_params", run.best_params},
         {"best_fom", number(run.best_fom)},
         {"fom_evaluations", run.fom_evaluations},
         {"iterations", run.iterations},
         {"stop_reason", to_string(run.stop_reason)},
         {"trace", std::move(trace)}};
  if (with_timing) j["wall_time"] = run.wall_time;
  return j;
}

Json to_json(const MomentEstimate& e) {
  return Json{{"t", e.t},
              {"frame_potential", number(e.frame_potential)},
              {"delta", number(e.delta)},
              {"pairs", e.pairs},
              {"sigma_t", e.sigma_t},
              {"plateau", e.plateau},
              {"sample_sigma", number(e.sample_sigma)}};
}

Json to_json(const DlaReport& r) {
  return Json{{"dim_found", r.dim_found},
              {"dim_full", r.dim_full},
              {"controllable", r.controllable},
              {"basis_residual", r.basis_residual}};
}

Json to_json(const RobustnessReport& r) {
  return Json{{"sigma_u", r.sigma_u},
              {"sigma_tau", r.sigma_tau},
              {"mean_delta_j", number(r.mean_delta_j)},
              {"bound", number(r.bound)},
              {"samples", r.samples},
              {"nominal_fom", number(r.nominal_fom)}};
}

}  // namespace rally
