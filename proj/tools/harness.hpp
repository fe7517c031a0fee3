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

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rally/analysis.hpp"
#include "rally/drivers.hpp"
#include "rally/serialization.hpp"

namespace rally::harness {

enum class Experiment {
  UnitarySynthesis,
  GroundState,
  StateTransfer,
  MomentConvergence,
  Robustness,
  Scaling,
};

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct SystemConfig {
  std::string kind = "ising";  // ising | rydberg
  int n = 1;                   // ising chain length
  std::uint64_t field_seed = 0;
  std::optional<AmplitudeDomain> amplitudes;  // ising only; rydberg uses its table
  std::filesystem::path geometry;              // rydberg only
};

struct FomConfig {
  std::string kind = "state";  // state | unitary | energy
  std::string initial = "zero";
  std::string target = "ghz";
  int cnot_control = 0;
  int cnot_target = 1;
  std::filesystem::path hamiltonian;  // energy only
  double penalty = 0.0;
};

struct MethodConfig {
  std::string label;
  SolveSpec spec;
  std::vector<int> n_layers;
  std::vector<int> layer_sizes;
  /// Scaling only: N_L = parameter bound of the system plus this margin.
  std::optional<int> n_layers_bound_margin;
  OptimizerConfig optimizer;
};

struct MomentsConfig {
  std::vector<int> orders = {2};
  long pairs = 100000;
  double tau_max = 10.0;
  std::vector<std::string> variants = {"sampled"};  // sampled | fixed
};

struct RobustnessConfig {
  std::vector<double> sigmas = {1e-6, 1e-5, 1e-4};
  long samples = 200;
  DurationNoise noise = DurationNoise::PerPulse;
  std::vector<std::string> channels = {"amplitude", "duration"};
};

struct ExperimentConfig {
  Experiment experiment = Experiment::StateTransfer;
  std::string name;
  SystemConfig system;
  FomConfig fom;
  std::vector<MethodConfig> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<double> thresholds = {1e-3};
  std::optional<double> duration_bin_width;
  MomentsConfig moments;
  RobustnessConfig robustness;
  std::vector<int> qubit_counts;  // scaling only
  std::filesystem::path output = "out";
  /// Canonical JSON echo of the parsed configuration tree.
  Json echo;
};

/// Applies `key.path=value` to a YAML tree; numeric segments index sequences.
void apply_override(YAML::Node& root, const std::string& assignment);

/// Relative file references resolve against `base_dir`.
ExperimentConfig parse_config(const YAML::Node& root, const std::filesystem::path& base_dir);

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// FNV-1a 64 of the echoed config with the output directory removed.
std::string config_hash(const ExperimentConfig& config);

/// "1,2,5-9" -> {1, 2, 5, 6, 7, 8, 9}.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// RALLY_WORKERS if set and positive, else 1.
int default_workers();

struct RunSummary {
  std::filesystem::path output;
  std::size_t runs = 0;
  std::vector<std::filesystem::path> files;
};

/// Executes every (group, seed) task, then writes run files, the manifest and
/// the aggregate tables into config.output.
RunSummary run_experiment(const ExperimentConfig& config, int workers = 1);

/// Rebuilds aggregate.csv and timing.csv from the run files of a finished
/// experiment directory. Throws SchemaMismatch on malformed inputs.
void aggregate_directory(const std::filesystem::path& dir);

/// Long-format plot table. Kinds: convergence, heatmap, moments, robustness, scaling.
std::string plot_data(const std::filesystem::path& aggregate_csv, const std::string& kind);

}  // namespace rally::harness
