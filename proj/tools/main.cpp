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

// rally: run, aggregate and tabulate optimal-control experiments.

#include <CLI11.hpp>
#include <iostream>

#include "harness.hpp"
#include "rally/errors.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

}  // namespace

int main(int argc, char** argv) {
  namespace h = rally::harness;

  CLI::App app{"Randomized layered control: experiment runner"};
  app.set_version_flag("--version", std::string(RALLY_VERSION));
  app.require_subcommand(1);

  std::string config_path, seeds, out_dir, aggregate_dir, aggregate_csv, kind;
  std::vector<std::string> overrides;
  int workers = h::default_workers();

  CLI::App* run = app.add_subcommand("run", "Execute every seed of an experiment config");
  run->add_option("config", config_path, "Experiment config (YAML)")->required();
  run->add_option("--seeds", seeds, "Seed list, e.g. 0-9 or 1,4,7");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--workers", workers, "Parallel seed workers (default: RALLY_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  run->add_option("--override", overrides, "Set a config field, key.path=value");

  CLI::App* agg = app.add_subcommand("aggregate", "Rebuild aggregate tables from run files");
  agg->add_option("dir", aggregate_dir, "Experiment output directory")->required();

  CLI::App* plot = app.add_subcommand("plot-data", "Emit a long-format plot table");
  plot->add_option("aggregate", aggregate_csv, "aggregate.csv (timing.csv for scaling)")
      ->required();
  plot->add_option("--kind", kind, "convergence | heatmap | moments | robustness | scaling")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      if (!seeds.empty()) {
        std::string list = "[";
        for (std::uint64_t s : h::parse_seed_list(seeds)) {
          list += (list.size() > 1 ? "," : "") + std::to_string(s);
        }
        overrides.push_back("seeds=" + list + "]");
      }
      if (!out_dir.empty()) overrides.push_back("output=\"" + out_dir + "\"");
      const h::ExperimentConfig cfg = h::load_config(config_path, overrides);
      const h::RunSummary summary = h::run_experiment(cfg, workers);
      std::cout << summary.runs << " runs written to " << summary.output.string() << '\n';
    } else if (*agg) {
      h::aggregate_directory(aggregate_dir);
    } else if (*plot) {
      std::cout << h::plot_data(aggregate_csv, kind);
    }
  } catch (const rally::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
