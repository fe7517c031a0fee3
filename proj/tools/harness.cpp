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

#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "rally/errors.hpp"

namespace rally::harness {

namespace fs = std::filesystem;

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::UnitarySynthesis: return "unitary_synthesis";
    case Experiment::GroundState: return "ground_state";
    case Experiment::StateTransfer: return "state_transfer";
    case Experiment::MomentConvergence: return "moment_convergence";
    case Experiment::Robustness: return "robustness";
    case Experiment::Scaling: return "scaling";
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (Experiment e : {Experiment::UnitarySynthesis, Experiment::GroundState,
                       Experiment::StateTransfer, Experiment::MomentConvergence,
                       Experiment::Robustness, Experiment::Scaling}) {
    if (name == to_string(e)) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

namespace {

// ---- YAML access ------------------------------------------------------------

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T as(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + ": malformed value");
  }
}

template <class T>
void read(const YAML::Node& parent, const char* key, T& out, const std::string& where) {
  if (const YAML::Node n = parent[key]) out = as<T>(n, where + "." + key);
}

template <class T>
std::vector<T> scalar_or_list(const YAML::Node& node, const std::string& where) {
  if (node.IsSequence()) {
    std::vector<T> out;
    for (const auto& item : node) out.push_back(as<T>(item, where));
    return out;
  }
  return {as<T>(node, where)};
}

fs::path resolve(const fs::path& base, const std::string& rel, const std::string& where) {
  fs::path p = rel;
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p)) throw ConfigError(where + ": file '" + p.string() + "' does not exist");
  return p.lexically_normal();
}

Json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      Json arr = Json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      Json obj = Json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  const char* end = s.data() + s.size();
  std::int64_t i = 0;
  if (auto r = std::from_chars(s.data(), end, i); r.ec == std::errc() && r.ptr == end) return i;
  double d = 0.0;
  if (auto r = std::from_chars(s.data(), end, d); r.ec == std::errc() && r.ptr == end) return d;
  if (s == "true" || s == "false") return s == "true";
  if (s == "~" || s == "null") return nullptr;
  return s;
}

// ---- Section parsers ----------------------------------------------------------

AmplitudeDomain parse_amplitudes(const YAML::Node& node, const std::string& where) {
  check_keys(node, {"interval", "discrete", "bound"}, where);
  if (node["interval"]) {
    const auto v = as<std::vector<double>>(node["interval"], where + ".interval");
    if (v.size() != 2) throw ConfigError(where + ".interval: expected [lo, hi]");
    return AmplitudeDomain::interval(v[0], v[1]);
  }
  if (node["discrete"]) {
    auto values = as<std::vector<double>>(node["discrete"], where + ".discrete");
    std::optional<std::pair<double, double>> bound;
    if (node["bound"]) {
      const auto b = as<std::vector<double>>(node["bound"], where + ".bound");
      if (b.size() != 2) throw ConfigError(where + ".bound: expected [lo, hi]");
      bound = std::make_pair(b[0], b[1]);
    }
    return AmplitudeDomain::discrete(std::move(values), bound);
  }
  throw ConfigError(where + ": expected 'interval' or 'discrete'");
}

OptimizerConfig parse_optimizer(const YAML::Node& node, OptimizerConfig cfg,
                                const std::string& where) {
  if (!node) return cfg;
  check_keys(node,
             {"method", "xatol", "fatol", "pgtol", "max_fom_evals", "target", "max_seconds",
              "history", "wolfe_c1", "wolfe_c2", "max_line_search_evals", "initial_step"},
             where);
  if (node["method"]) {
    try {
      cfg.method = optimizer_method_from_string(as<std::string>(node["method"], where));
    } catch (const Error& e) {
      throw ConfigError(where + ".method: " + e.what());
    }
  }
  read(node, "xatol", cfg.xatol, where);
  read(node, "fatol", cfg.fatol, where);
  read(node, "pgtol", cfg.pgtol, where);
  read(node, "max_fom_evals", cfg.max_fom_evals, where);
  read(node, "history", cfg.history, where);
  read(node, "wolfe_c1", cfg.wolfe_c1, where);
  read(node, "wolfe_c2", cfg.wolfe_c2, where);
  read(node, "max_line_search_evals", cfg.max_line_search_evals, where);
  if (node["target"]) cfg.target = as<double>(node["target"], where + ".target");
  if (node["max_seconds"]) cfg.max_seconds = as<double>(node["max_seconds"], where + ".max_seconds");
  if (node["initial_step"]) {
    cfg.initial_step = as<double>(node["initial_step"], where + ".initial_step");
  }
  return cfg;
}

MethodConfig parse_method(const YAML::Node& node, const OptimizerConfig& base,
                          const std::string& where) {
  check_keys(node,
             {"kind", "label", "n_layers", "n_layers_margin", "layer_size", "dt", "tau_init_max",
              "tau_max", "initial_total", "rise", "rise_insertion", "frechet", "dcrab",
              "optimizer"},
             where);
  MethodConfig m;
  if (!node["kind"]) throw ConfigError(where + ": missing 'kind'");
  try {
    m.spec.method = sequence_kind_from_string(as<std::string>(node["kind"], where + ".kind"));
  } catch (const ConfigError& e) {
    throw ConfigError(where + ".kind: " + e.what());
  }
  m.label = node["label"] ? as<std::string>(node["label"], where + ".label")
                          : std::string(rally::to_string(m.spec.method));

  if (const YAML::Node nl = node["n_layers"]) {
    if (nl.IsScalar() && nl.Scalar() == "bound") {
      m.n_layers_bound_margin = 0;
      read(node, "n_layers_margin", *m.n_layers_bound_margin, where);
    } else {
      m.n_layers = scalar_or_list<int>(nl, where + ".n_layers");
    }
  } else if (m.spec.method == SequenceKind::Dcrab) {
    m.n_layers = {1};
  } else {
    throw ConfigError(where + ": missing 'n_layers'");
  }
  for (int v : m.n_layers) {
    if (v < 1) throw ConfigError(where + ".n_layers: must be >= 1");
  }
  m.layer_sizes = node["layer_size"] ? scalar_or_list<int>(node["layer_size"], where + ".layer_size")
                                     : std::vector<int>{1};
  if (m.spec.method == SequenceKind::Grape || m.spec.method == SequenceKind::Dcrab) {
    m.layer_sizes = {1};
  }
  for (int v : m.layer_sizes) {
    if (v < 1) throw ConfigError(where + ".layer_size: must be >= 1");
  }

  read(node, "dt", m.spec.dt, where);
  read(node, "tau_init_max", m.spec.tau_init_max, where);
  read(node, "tau_max", m.spec.tau_max, where);
  if (node["initial_total"]) {
    m.spec.initial_total = as<double>(node["initial_total"], where + ".initial_total");
  }
  if (const YAML::Node r = node["rise"]) {
    check_keys(r, {"tau_rise", "n_int", "epsilon"}, where + ".rise");
    RiseProfile p;
    read(r, "tau_rise", p.tau_rise, where + ".rise");
    read(r, "n_int", p.n_int, where + ".rise");
    read(r, "epsilon", p.epsilon, where + ".rise");
    try {
      p.validate();
    } catch (const Error& e) {
      throw ConfigError(where + ".rise: " + e.what());
    }
    m.spec.rise = p;
  }
  if (node["rise_insertion"]) {
    const auto s = as<std::string>(node["rise_insertion"], where + ".rise_insertion");
    if (s == "at_jumps") {
      m.spec.rise_insertion = RiseInsertion::AtJumps;
    } else if (s == "every_boundary") {
      m.spec.rise_insertion = RiseInsertion::EveryBoundary;
    } else {
      throw ConfigError(where + ".rise_insertion: expected at_jumps or every_boundary");
    }
  }
  if (node["frechet"]) {
    const auto s = as<std::string>(node["frechet"], where + ".frechet");
    if (s == "exact") {
      m.spec.frechet = FrechetMode::Exact;
    } else if (s == "first_order") {
      m.spec.frechet = FrechetMode::FirstOrder;
    } else {
      throw ConfigError(where + ".frechet: expected exact or first_order");
    }
  }
  if (const YAML::Node d = node["dcrab"]) {
    const std::string w = where + ".dcrab";
    check_keys(d,
               {"total_time", "time_steps", "superiterations", "basis_size", "bandwidth",
                "coefficient_step"},
               w);
    read(d, "total_time", m.spec.dcrab.total_time, w);
    read(d, "time_steps", m.spec.dcrab.time_steps, w);
    read(d, "superiterations", m.spec.dcrab.n_superiterations, w);
    read(d, "basis_size", m.spec.dcrab.basis_size, w);
    read(d, "bandwidth", m.spec.dcrab.bandwidth, w);
    read(d, "coefficient_step", m.spec.dcrab.coefficient_step, w);
  }
  m.optimizer = parse_optimizer(node["optimizer"], base, where + ".optimizer");
  return m;
}

// ---- Problem construction -------------------------------------------------------

ControlSystem build_system(const SystemConfig& s, int n_override) {
  if (s.kind == "ising") {
    const int n = n_override > 0 ? n_override : s.n;
    Rng rng = substream(s.field_seed, static_cast<std::uint64_t>(n));
    const auto [hx, hz] = random_ising_fields(n, rng);
    return build_ising(n, hx, hz, s.amplitudes.value_or(AmplitudeDomain::interval(-1.0, 1.0)));
  }
  return build_rydberg(read_geometry_csv(s.geometry.string()));
}

int qubit_count(const ControlSystem& sys) {
  int n = 0;
  while ((1 << n) < sys.dim()) ++n;
  return n;
}

StateVector named_state(const std::string& name, int n) {
  const int dim = 1 << n;
  if (name == "zero") return basis_state(dim, 0);
  if (name == "ones") return basis_state(dim, dim - 1);
  if (name == "ghz") return ghz_state(n);
  if (name.rfind("basis:", 0) == 0) return basis_state(dim, std::stoll(name.substr(6)));
  throw ConfigError("unknown state '" + name + "'");
}

struct Problem {
  ControlSystem system;
  FigureOfMerit fom;
  double offset = 0.0;  // exact ground energy for energy objectives
};

Problem build_problem(const ExperimentConfig& cfg, int n_override) {
  Problem p{build_system(cfg.system, n_override), {}, 0.0};
  const int n = qubit_count(p.system);
  const FomConfig& f = cfg.fom;
  if (f.kind == "state") {
    p.fom = FigureOfMerit::state(named_state(f.initial, n), named_state(f.target, n));
  } else if (f.kind == "unitary") {
    if (f.target == "cnot") {
      p.fom = FigureOfMerit::unitary(cnot_target(n, f.cnot_control, f.cnot_target));
    } else if (f.target == "identity") {
      p.fom = FigureOfMerit::unitary(OperatorMatrix::Identity(1 << n, 1 << n));
    } else {
      throw ConfigError("fom.target: expected cnot or identity for unitary objectives");
    }
  } else {
    const OperatorMatrix h = load_molecular_hamiltonian(f.hamiltonian.string(), n);
    if (h.rows() != p.system.dim()) {
      throw ConfigError("fom.hamiltonian: dimension does not match the system");
    }
    p.fom = FigureOfMerit::energy(named_state(f.initial, n), h);
    p.offset = eigh(h).eigenvalues(0);
  }
  p.fom.penalty_weight = f.penalty;
  return p;
}

// ---- Tasks ----------------------------------------------------------------------

struct Group {
  int index = 0;
  const MethodConfig* method = nullptr;
  int n_layers = 1;
  int layer_size = 1;
  int n_qubits = 0;  // 0: use the system default
};

long parameter_count(const MethodConfig& m, int n_layers) {
  if (m.spec.method != SequenceKind::Dcrab) return n_layers;
  const DcrabConfig& d = m.spec.dcrab;
  return static_cast<long>(d.n_superiterations) * d.basis_size + (d.n_superiterations - 1);
}

std::vector<Group> enumerate_groups(const ExperimentConfig& cfg) {
  std::vector<Group> groups;
  for (const MethodConfig& m : cfg.methods) {
    if (cfg.experiment == Experiment::Scaling) {
      for (int n : cfg.qubit_counts) {
        std::vector<int> layers = m.n_layers;
        if (m.n_layers_bound_margin) {
          const ControlTask task = cfg.fom.kind == "unitary" ? ControlTask::UnitarySynthesis
                                                             : ControlTask::StateTransfer;
          layers = {static_cast<int>(parameter_bound(task, 1L << n)) + *m.n_layers_bound_margin};
        }
        for (int nl : layers) {
          for (int np : m.layer_sizes) {
            groups.push_back({static_cast<int>(groups.size()), &m, nl, np, n});
          }
        }
      }
      continue;
    }
    for (int nl : m.n_layers) {
      for (int np : m.layer_sizes) groups.push_back({static_cast<int>(groups.size()), &m, nl, np, 0});
    }
  }
  return groups;
}

struct TaskResult {
  Json record;
  Json timing;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json group_json(const Group& g, const MethodConfig& m, const ControlSystem& sys) {
  Json j;
  j["index"] = g.index;
  j["method"] = m.label;
  j["kind"] = rally::to_string(m.spec.method);
  j["n_layers"] = g.n_layers;
  j["layer_size"] = g.layer_size;
  j["n_params"] = parameter_count(m, g.n_layers);
  j["n_qubits"] = qubit_count(sys);
  j["dimension"] = sys.dim();
  return j;
}

SolveSpec solve_spec(const Group& g, std::uint64_t seed) {
  SolveSpec spec = g.method->spec;
  spec.n_layers = g.n_layers;
  spec.layer_size = g.layer_size;
  spec.seed = seed;
  return spec;
}

TaskResult run_optimization(const ExperimentConfig& cfg, const Group& g, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const Problem p = build_problem(cfg, g.n_qubits);
  const double build_seconds = seconds_since(t0);
  const MethodConfig& m = *g.method;
  OptimizerConfig opt = m.optimizer;
  if (opt.target) opt.target = *opt.target + p.offset;
  const SolveResult r = solve(p.system, p.fom, solve_spec(g, seed), opt);

  Json evals = Json::array();
  const double metric = r.final_fom - p.offset;
  for (double thr : cfg.thresholds) {
    if (metric > thr) {
      evals.push_back(nullptr);
      continue;
    }
    long first = r.run.fom_evaluations;
    for (const TracePoint& tp : r.run.trace) {
      if (tp.best_fom - p.offset <= thr) {
        first = tp.evaluations;
        break;
      }
    }
    evals.push_back(first);
  }

  TaskResult out;
  Json& rec = out.record;
  rec["group"] = group_json(g, m, p.system);
  rec["metrics"] = {{"final_fom", metric},
                    {"fom_offset", p.offset},
                    {"best_objective", r.run.best_fom},
                    {"fom_evaluations", r.run.fom_evaluations},
                    {"iterations", r.run.iterations},
                    {"evals_to_threshold", evals},
                    {"total_duration", r.total_duration},
                    {"stop_reason", rally::to_string(r.run.stop_reason)}};
  rec["run"] = to_json(r.run);
  rec["sequence"] = to_json(r.sequence);
  out.timing = {{"optimization_seconds", r.run.wall_time},
                {"preprocessing_seconds", r.preprocessing_seconds + build_seconds}};
  return out;
}

TaskResult run_moments(const ExperimentConfig& cfg, const Group& g, std::uint64_t seed,
                       int inner_workers) {
  const auto t0 = std::chrono::steady_clock::now();
  const ControlSystem sys = build_system(cfg.system, 0);
  const MomentsConfig& mc = cfg.moments;
  Json estimates = Json::array();
  for (const std::string& variant : mc.variants) {
    UnitarySampler sampler;
    if (variant == "sampled") {
      sampler = rally_t_sampler(sys, g.n_layers, g.layer_size, mc.tau_max);
    } else {
      const PulseSequence frozen =
          PulseSequence::rally_t(sys.amplitudes, g.n_layers, g.layer_size, substream(seed, 3)());
      sampler = rally_t_duration_sampler(sys, frozen, mc.tau_max);
    }
    for (const MomentEstimate& e : moment_gaps(sampler, mc.orders, mc.pairs, seed, inner_workers)) {
      Json j = to_json(e);
      j["variant"] = variant;
      estimates.push_back(std::move(j));
    }
  }
  TaskResult out;
  out.record["group"] = group_json(g, *g.method, sys);
  out.record["metrics"] = {{"estimates", estimates}};
  out.timing = {{"optimization_seconds", seconds_since(t0)}, {"preprocessing_seconds", 0.0}};
  return out;
}

TaskResult run_robustness(const ExperimentConfig& cfg, const Group& g, std::uint64_t seed) {
  TaskResult out = run_optimization(cfg, g, seed);
  const Problem p = build_problem(cfg, g.n_qubits);
  const PulseSequence seq = sequence_from_json(out.record["sequence"]);
  const RobustnessConfig& rc = cfg.robustness;
  Json entries = Json::array();
  std::uint64_t stream = 100;
  for (const std::string& channel : rc.channels) {
    for (double sigma : rc.sigmas) {
      Rng rng = substream(seed, stream++);
      const double su = channel == "amplitude" ? sigma : 0.0;
      const double st = channel == "duration" ? sigma : 0.0;
      const RobustnessReport rep =
          robustness_study(p.system, seq, p.fom, su, st, rc.samples, rng, rc.noise);
      Json j = to_json(rep);
      j["channel"] = channel;
      j["sigma"] = sigma;
      entries.push_back(std::move(j));
    }
  }
  out.record["metrics"]["robustness"] = entries;
  return out;
}

// ---- Text output --------------------------------------------------------------

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SchemaMismatch("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string num(double v) { return format_double(v); }

double median_of(std::vector<double> v) { return median(std::move(v)); }

Json manifest_json(const ExperimentConfig& cfg, const std::vector<std::string>& files) {
  Json m;
  m["schema"] = "rally-manifest/1";
  m["toolkit_version"] = RALLY_VERSION;
  m["config_hash"] = config_hash(cfg);
  m["config"] = cfg.echo;
  m["experiment"] = to_string(cfg.experiment);
  m["seeds"] = cfg.seeds;
  m["thresholds"] = cfg.thresholds;
  m["duration_bin_width"] =
      cfg.duration_bin_width ? Json(*cfg.duration_bin_width) : Json(nullptr);
  m["files"] = files;
  m["log_scale"] = {
      {"convergence", {{"n_params", false}, {"median_J", true}, {"success_prob", false},
                       {"median_evals", true}}},
      {"heatmap", {{"total_duration_bin", false}, {"NP", false}, {"success_prob", false}}},
      {"moments", {{"NL_times_NP", false}, {"delta", true}, {"plateau", true}}},
      {"robustness", {{"sigma", true}, {"mean_delta_j", true}, {"bound", true}}},
      {"scaling", {{"dimension", true}, {"median_seconds", true}}}};
  return m;
}

// ---- Aggregation ---------------------------------------------------------------

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaMismatch(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  try {
    return field(j, key, where).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaMismatch(where + ": field '" + key + "' has the wrong type");
  }
}

struct RunFile {
  std::string name;
  Json record;
};

std::vector<RunFile> load_runs(const fs::path& dir) {
  const fs::path runs_dir = dir / "runs";
  if (!fs::is_directory(runs_dir)) throw SchemaMismatch("no runs/ directory in " + dir.string());
  std::vector<RunFile> runs;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.path().extension() != ".json") continue;
    RunFile rf{entry.path().filename().string(), {}};
    try {
      rf.record = Json::parse(read_text(entry.path()));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaMismatch(rf.name + ": " + e.what());
    }
    if (rf.record.value("schema", "") != "rally-run/1") {
      throw SchemaMismatch(rf.name + ": not a run record");
    }
    runs.push_back(std::move(rf));
  }
  if (runs.empty()) throw SchemaMismatch("no run files in " + runs_dir.string());
  std::sort(runs.begin(), runs.end(), [](const RunFile& a, const RunFile& b) {
    return a.record.value("task", 0L) < b.record.value("task", 0L);
  });
  return runs;
}

std::string bin_label(double duration, std::optional<double> width) {
  if (!width) return "NA";
  return num(std::floor(duration / *width) * *width);
}

std::string optimization_table(const std::vector<RunFile>& runs, const Json& manifest) {
  const auto thresholds = get<std::vector<double>>(manifest, "thresholds", "manifest");
  std::optional<double> width;
  if (!manifest.at("duration_bin_width").is_null()) {
    width = get<double>(manifest, "duration_bin_width", "manifest");
  }
  struct Acc {
    const Json* group = nullptr;
    std::string bin;
    std::vector<double> foms;
    std::vector<std::vector<double>> evals;
  };
  std::map<std::pair<int, std::string>, Acc> groups;
  // Bins sort numerically inside each group.
  auto key_of = [](int index, const std::string& bin) { return std::make_pair(index, bin); };
  for (const RunFile& rf : runs) {
    const Json& g = field(rf.record, "group", rf.name);
    const Json& m = field(rf.record, "metrics", rf.name);
    const std::string bin = bin_label(get<double>(m, "total_duration", rf.name), width);
    Acc& acc = groups[key_of(get<int>(g, "index", rf.name), bin)];
    acc.group = &g;
    acc.bin = bin;
    acc.foms.push_back(get<double>(m, "final_fom", rf.name));
    const Json& ev = field(m, "evals_to_threshold", rf.name);
    if (!ev.is_array() || ev.size() != thresholds.size()) {
      throw SchemaMismatch(rf.name + ": evals_to_threshold does not match the thresholds");
    }
    acc.evals.resize(thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (!ev[k].is_null()) acc.evals[k].push_back(ev[k].get<double>());
    }
  }
  std::vector<Acc*> ordered;
  for (auto& [key, acc] : groups) ordered.push_back(&acc);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Acc* a, const Acc* b) {
    const int ia = a->group->at("index").get<int>(), ib = b->group->at("index").get<int>();
    if (ia != ib) return ia < ib;
    if (a->bin == "NA" || b->bin == "NA") return false;
    return std::stod(a->bin) < std::stod(b->bin);
  });

  std::ostringstream out;
  out << "method,n_qubits,dimension,n_layers,layer_size,n_params,duration_bin,runs,median_J";
  const bool suffix = thresholds.size() > 1;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const std::string s = suffix ? "@" + num(thresholds[k]) : "";
    out << ",success_prob" << s << ",median_evals" << s;
  }
  out << '\n';
  for (const Acc* acc : ordered) {
    const Json& g = *acc->group;
    out << g.at("method").get<std::string>() << ',' << g.at("n_qubits").get<int>() << ','
        << g.at("dimension").get<int>() << ',' << g.at("n_layers").get<int>() << ','
        << g.at("layer_size").get<int>() << ',' << g.at("n_params").get<long>() << ','
        << acc->bin << ',' << acc->foms.size() << ',' << num(median_of(acc->foms));
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      const double success = static_cast<double>(acc->evals[k].size()) / acc->foms.size();
      out << ',' << num(success) << ','
          << (acc->evals[k].empty() ? std::string("NA") : num(median_of(acc->evals[k])));
    }
    out << '\n';
  }
  return out.str();
}

std::string moments_table(const std::vector<RunFile>& runs) {
  struct Acc {
    const Json* group = nullptr;
    std::string variant;
    int t = 0;
    long pairs = 0;
    double plateau = 0.0;
    std::vector<double> frame, delta;
  };
  std::map<std::tuple<int, std::string, int>, Acc> rows;
  for (const RunFile& rf : runs) {
    const Json& g = field(rf.record, "group", rf.name);
    const Json& ests = field(field(rf.record, "metrics", rf.name), "estimates", rf.name);
    for (const Json& e : ests) {
      const std::string variant = get<std::string>(e, "variant", rf.name);
      const int t = get<int>(e, "t", rf.name);
      Acc& acc = rows[{get<int>(g, "index", rf.name), variant, t}];
      acc.group = &g;
      acc.variant = variant;
      acc.t = t;
      acc.pairs = get<long>(e, "pairs", rf.name);
      acc.plateau = get<double>(e, "plateau", rf.name);
      acc.frame.push_back(get<double>(e, "frame_potential", rf.name));
      acc.delta.push_back(get<double>(e, "delta", rf.name));
    }
  }
  std::ostringstream out;
  out << "series,method,n_layers,layer_size,NL_times_NP,t,runs,pairs,median_frame_potential,"
         "median_delta,plateau\n";
  for (const auto& [key, acc] : rows) {
    const Json& g = *acc.group;
    const int nl = g.at("n_layers").get<int>(), np = g.at("layer_size").get<int>();
    out << acc.variant << ',' << g.at("method").get<std::string>() << ',' << nl << ',' << np
        << ',' << nl * np << ',' << acc.t << ',' << acc.delta.size() << ',' << acc.pairs << ','
        << num(median_of(acc.frame)) << ',' << num(median_of(acc.delta)) << ','
        << num(acc.plateau) << '\n';
  }
  return out.str();
}

std::string robustness_table(const std::vector<RunFile>& runs) {
  struct Acc {
    const Json* group = nullptr;
    std::string channel;
    double sigma = 0.0;
    std::vector<double> nominal, mean, bound, ratio;
  };
  std::map<std::tuple<int, std::string, double>, Acc> rows;
  for (const RunFile& rf : runs) {
    const Json& g = field(rf.record, "group", rf.name);
    const Json& entries = field(field(rf.record, "metrics", rf.name), "robustness", rf.name);
    for (const Json& e : entries) {
      const std::string channel = get<std::string>(e, "channel", rf.name);
      const double sigma = get<double>(e, "sigma", rf.name);
      Acc& acc = rows[{get<int>(g, "index", rf.name), channel, sigma}];
      acc.group = &g;
      acc.channel = channel;
      acc.sigma = sigma;
      const double mean = get<double>(e, "mean_delta_j", rf.name);
      const double bound = get<double>(e, "bound", rf.name);
      acc.nominal.push_back(get<double>(e, "nominal_fom", rf.name));
      acc.mean.push_back(mean);
      acc.bound.push_back(bound);
      acc.ratio.push_back(bound > 0.0 ? mean / bound : 0.0);
    }
  }
  std::ostringstream out;
  out << "method,n_layers,layer_size,channel,sigma,runs,median_nominal_J,mean_delta_j,bound,"
         "ratio\n";
  for (const auto& [key, acc] : rows) {
    const Json& g = *acc.group;
    out << g.at("method").get<std::string>() << ',' << g.at("n_layers").get<int>() << ','
        << g.at("layer_size").get<int>() << ',' << acc.channel << ',' << num(acc.sigma) << ','
        << acc.mean.size() << ',' << num(median_of(acc.nominal)) << ','
        << num(median_of(acc.mean)) << ',' << num(median_of(acc.bound)) << ','
        << num(median_of(acc.ratio)) << '\n';
  }
  return out.str();
}

std::string timing_table(const std::vector<RunFile>& runs) {
  struct Acc {
    const Json* group = nullptr;
    std::vector<double> total, pre;
  };
  std::map<int, Acc> rows;
  for (const RunFile& rf : runs) {
    const Json& g = field(rf.record, "group", rf.name);
    const Json& t = field(rf.record, "timing", rf.name);
    Acc& acc = rows[get<int>(g, "index", rf.name)];
    acc.group = &g;
    const double pre = get<double>(t, "preprocessing_seconds", rf.name);
    acc.pre.push_back(pre);
    acc.total.push_back(pre + get<double>(t, "optimization_seconds", rf.name));
  }
  std::ostringstream out;
  out << "method,n_qubits,dimension,n_layers,layer_size,runs,median_seconds,"
         "median_preprocessing_seconds\n";
  for (const auto& [index, acc] : rows) {
    const Json& g = *acc.group;
    out << g.at("method").get<std::string>() << ',' << g.at("n_qubits").get<int>() << ','
        << g.at("dimension").get<int>() << ',' << g.at("n_layers").get<int>() << ','
        << g.at("layer_size").get<int>() << ',' << acc.total.size() << ','
        << num(median_of(acc.total)) << ',' << num(median_of(acc.pre)) << '\n';
  }
  return out.str();
}

// ---- CSV input for plot data ----------------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaMismatch("table has no column '" + name + "'");
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Table read_table(const fs::path& path) {
  std::istringstream in(read_text(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch(path.string() + ": empty table");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) {
      throw SchemaMismatch(path.string() + ": row width does not match the header");
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace

// ---- Public API -------------------------------------------------------------------

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + assignment + "': " + e.what());
  }
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');) keys.push_back(k);

  // Node assignment in yaml-cpp rebinds references, so descend by copying handles.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    YAML::Node cur = chain.back();
    YAML::Node next;
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(keys[i]);
      } catch (const std::exception&) {
        throw ConfigError("override '" + path + "': '" + keys[i] + "' is not an index");
      }
      if (idx >= cur.size()) throw ConfigError("override '" + path + "': index out of range");
      next = cur[idx];
    } else {
      next = cur[keys[i]];
    }
    chain.push_back(next);
  }
  YAML::Node leaf = chain.back();
  if (leaf.IsSequence()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(keys.back());
    } catch (const std::exception&) {
      throw ConfigError("override '" + path + "': '" + keys.back() + "' is not an index");
    }
    if (idx >= leaf.size()) throw ConfigError("override '" + path + "': index out of range");
    leaf[idx] = value;
  } else {
    leaf[keys.back()] = value;
  }
}

ExperimentConfig parse_config(const YAML::Node& root, const fs::path& base_dir) {
  if (!root.IsMap()) throw ConfigError("config: expected a mapping at the top level");
  check_keys(root,
             {"experiment", "name", "system", "fom", "method", "methods", "optimizer", "seeds",
              "thresholds", "aggregate", "moments", "robustness", "qubit_counts", "output"},
             "config");
  ExperimentConfig cfg;
  if (!root["experiment"]) throw ConfigError("config: missing 'experiment'");
  cfg.experiment = experiment_from_string(as<std::string>(root["experiment"], "experiment"));
  read(root, "name", cfg.name, "config");

  const YAML::Node sys = root["system"];
  if (!sys) throw ConfigError("config: missing 'system'");
  check_keys(sys, {"kind", "n", "field_seed", "amplitudes", "geometry"}, "system");
  read(sys, "kind", cfg.system.kind, "system");
  read(sys, "n", cfg.system.n, "system");
  read(sys, "field_seed", cfg.system.field_seed, "system");
  if (cfg.system.kind == "ising") {
    if (cfg.system.n < 1) throw ConfigError("system.n: must be >= 1");
    if (sys["amplitudes"]) cfg.system.amplitudes = parse_amplitudes(sys["amplitudes"], "system.amplitudes");
  } else if (cfg.system.kind == "rydberg") {
    if (!sys["geometry"]) throw ConfigError("system: rydberg needs 'geometry'");
    cfg.system.geometry = resolve(base_dir, as<std::string>(sys["geometry"], "system.geometry"),
                                  "system.geometry");
  } else {
    throw ConfigError("system.kind: expected ising or rydberg");
  }

  if (const YAML::Node f = root["fom"]) {
    check_keys(f, {"kind", "initial", "target", "cnot", "hamiltonian", "penalty"}, "fom");
    read(f, "kind", cfg.fom.kind, "fom");
    read(f, "initial", cfg.fom.initial, "fom");
    read(f, "target", cfg.fom.target, "fom");
    read(f, "penalty", cfg.fom.penalty, "fom");
    if (f["cnot"]) {
      const auto c = as<std::vector<int>>(f["cnot"], "fom.cnot");
      if (c.size() != 2) throw ConfigError("fom.cnot: expected [control, target]");
      cfg.fom.cnot_control = c[0];
      cfg.fom.cnot_target = c[1];
    }
    if (cfg.fom.kind == "energy") {
      if (!f["hamiltonian"]) throw ConfigError("fom: energy needs 'hamiltonian'");
      cfg.fom.hamiltonian =
          resolve(base_dir, as<std::string>(f["hamiltonian"], "fom.hamiltonian"), "fom.hamiltonian");
    } else if (cfg.fom.kind != "state" && cfg.fom.kind != "unitary") {
      throw ConfigError("fom.kind: expected state, unitary or energy");
    }
    if (cfg.fom.penalty < 0.0) throw ConfigError("fom.penalty: must be >= 0");
  } else if (cfg.experiment != Experiment::MomentConvergence) {
    throw ConfigError("config: missing 'fom'");
  }

  const OptimizerConfig base = parse_optimizer(root["optimizer"], OptimizerConfig{}, "optimizer");
  if (root["method"] && root["methods"]) throw ConfigError("config: give 'method' or 'methods'");
  if (const YAML::Node m = root["method"]) {
    cfg.methods.push_back(parse_method(m, base, "method"));
  } else if (const YAML::Node ms = root["methods"]) {
    if (!ms.IsSequence()) throw ConfigError("methods: expected a list");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      cfg.methods.push_back(parse_method(ms[i], base, "methods." + std::to_string(i)));
    }
  }
  if (cfg.methods.empty()) throw ConfigError("config: no method given");
  for (const MethodConfig& m : cfg.methods) {
    if (m.n_layers_bound_margin && cfg.experiment != Experiment::Scaling) {
      throw ConfigError("n_layers: 'bound' is only valid for scaling experiments");
    }
  }

  if (const YAML::Node s = root["seeds"]) {
    cfg.seeds = scalar_or_list<std::uint64_t>(s, "seeds");
  } else {
    for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  }
  if (cfg.seeds.empty()) throw ConfigError("seeds: must not be empty");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size()) {
    throw ConfigError("seeds: duplicates are not allowed");
  }
  if (root["thresholds"]) cfg.thresholds = scalar_or_list<double>(root["thresholds"], "thresholds");
  if (cfg.thresholds.empty()) throw ConfigError("thresholds: must not be empty");
  if (const YAML::Node a = root["aggregate"]) {
    check_keys(a, {"duration_bin_width"}, "aggregate");
    if (a["duration_bin_width"]) {
      cfg.duration_bin_width = as<double>(a["duration_bin_width"], "aggregate.duration_bin_width");
      if (!(*cfg.duration_bin_width > 0.0)) {
        throw ConfigError("aggregate.duration_bin_width: must be positive");
      }
    }
  }

  if (const YAML::Node m = root["moments"]) {
    check_keys(m, {"orders", "pairs", "tau_max", "variants"}, "moments");
    if (m["orders"]) cfg.moments.orders = scalar_or_list<int>(m["orders"], "moments.orders");
    read(m, "pairs", cfg.moments.pairs, "moments");
    read(m, "tau_max", cfg.moments.tau_max, "moments");
    if (m["variants"]) {
      cfg.moments.variants = scalar_or_list<std::string>(m["variants"], "moments.variants");
    }
    for (const auto& v : cfg.moments.variants) {
      if (v != "sampled" && v != "fixed") {
        throw ConfigError("moments.variants: expected sampled or fixed");
      }
    }
  }
  if (const YAML::Node r = root["robustness"]) {
    check_keys(r, {"sigmas", "samples", "noise", "channels"}, "robustness");
    if (r["sigmas"]) cfg.robustness.sigmas = scalar_or_list<double>(r["sigmas"], "robustness.sigmas");
    read(r, "samples", cfg.robustness.samples, "robustness");
    if (r["noise"]) {
      const auto s = as<std::string>(r["noise"], "robustness.noise");
      if (s == "per_layer") {
        cfg.robustness.noise = DurationNoise::PerLayer;
      } else if (s == "per_pulse") {
        cfg.robustness.noise = DurationNoise::PerPulse;
      } else {
        throw ConfigError("robustness.noise: expected per_layer or per_pulse");
      }
    }
    if (r["channels"]) {
      cfg.robustness.channels = scalar_or_list<std::string>(r["channels"], "robustness.channels");
    }
    for (const auto& c : cfg.robustness.channels) {
      if (c != "amplitude" && c != "duration") {
        throw ConfigError("robustness.channels: expected amplitude or duration");
      }
    }
  }
  if (root["qubit_counts"]) {
    cfg.qubit_counts = scalar_or_list<int>(root["qubit_counts"], "qubit_counts");
  }
  if (root["output"]) cfg.output = as<std::string>(root["output"], "output");

  switch (cfg.experiment) {
    case Experiment::MomentConvergence:
      for (const MethodConfig& m : cfg.methods) {
        if (m.spec.method != SequenceKind::RallyT) {
          throw ConfigError("moment_convergence: only rally_t methods are supported");
        }
      }
      for (int t : cfg.moments.orders) {
        if (t < 1 || t > 4) throw ConfigError("moments.orders: supported orders are 1..4");
      }
      if (cfg.moments.pairs < 1000) throw ConfigError("moments.pairs: need at least 1000");
      break;
    case Experiment::Scaling:
      if (cfg.system.kind != "ising") throw ConfigError("scaling: requires an ising system");
      if (cfg.qubit_counts.empty()) throw ConfigError("scaling: missing 'qubit_counts'");
      for (int n : cfg.qubit_counts) {
        if (n < 1 || n > 12) throw ConfigError("qubit_counts: expected values in 1..12");
      }
      break;
    case Experiment::Robustness:
      for (const MethodConfig& m : cfg.methods) {
        if (m.spec.method != SequenceKind::RallyT && m.spec.method != SequenceKind::Grape) {
          throw ConfigError("robustness: only rally_t and grape methods are supported");
        }
      }
      if (cfg.robustness.samples < 1) throw ConfigError("robustness.samples: must be >= 1");
      break;
    case Experiment::GroundState:
      if (cfg.fom.kind != "energy") throw ConfigError("ground_state: fom.kind must be energy");
      break;
    case Experiment::UnitarySynthesis:
      if (cfg.fom.kind != "unitary") throw ConfigError("unitary_synthesis: fom.kind must be unitary");
      break;
    case Experiment::StateTransfer:
      if (cfg.fom.kind != "state") throw ConfigError("state_transfer: fom.kind must be state");
      break;
  }

  for (const MethodConfig& m : cfg.methods) m.optimizer.validate(0);

  cfg.echo = yaml_to_json(root);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config '" + path.string() + "'");
  } catch (const YAML::Exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  for (const std::string& o : overrides) apply_override(root, o);
  return parse_config(root, path.parent_path());
}

std::string config_hash(const ExperimentConfig& config) {
  Json echo = config.echo;
  if (echo.is_object()) echo.erase("output");
  const std::string text = echo.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  auto parse = [&](const std::string& s) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      throw ConfigError("seeds: cannot parse '" + s + "'");
    }
    return v;
  };
  for (std::string item; std::getline(ss, item, ',');) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse(item));
      continue;
    }
    const std::uint64_t lo = parse(item.substr(0, dash)), hi = parse(item.substr(dash + 1));
    if (hi < lo) throw ConfigError("seeds: empty range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("seeds: empty list");
  return seeds;
}

int default_workers() {
  if (const char* env = std::getenv("RALLY_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

RunSummary run_experiment(const ExperimentConfig& cfg, int workers) {
  const std::vector<Group> groups = enumerate_groups(cfg);
  struct Task {
    const Group* group;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const Group& g : groups) {
    for (std::uint64_t s : cfg.seeds) tasks.push_back({&g, s});
  }
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  const int inner = std::max(1, workers / static_cast<int>(tasks.size()));

  std::vector<TaskResult> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      try {
        switch (cfg.experiment) {
          case Experiment::MomentConvergence:
            results[i] = run_moments(cfg, *t.group, t.seed, inner);
            break;
          case Experiment::Robustness:
            results[i] = run_robustness(cfg, *t.group, t.seed);
            break;
          default:
            results[i] = run_optimization(cfg, *t.group, t.seed);
            break;
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunSummary summary{cfg.output, tasks.size(), {}};
  fs::create_directories(cfg.output / "runs");
  std::vector<std::string> files;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Json& rec = results[i].record;
    rec["schema"] = "rally-run/1";
    rec["experiment"] = to_string(cfg.experiment);
    rec["task"] = i;
    rec["seed"] = tasks[i].seed;
    rec["timing"] = results[i].timing;
    char name[64];
    std::snprintf(name, sizeof name, "run_g%04d_s%llu.json", tasks[i].group->index,
                  static_cast<unsigned long long>(tasks[i].seed));
    const fs::path rel = fs::path("runs") / name;
    write_text(cfg.output / rel, rec.dump(2) + "\n");
    files.push_back(rel.generic_string());
  }
  files.push_back("aggregate.csv");
  files.push_back("timing.csv");
  write_text(cfg.output / "manifest.json", manifest_json(cfg, files).dump(2) + "\n");
  aggregate_directory(cfg.output);
  files.push_back("manifest.json");
  for (const auto& f : files) summary.files.push_back(cfg.output / f);
  return summary;
}

void aggregate_directory(const fs::path& dir) {
  Json manifest;
  try {
    manifest = Json::parse(read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaMismatch(std::string("manifest.json: ") + e.what());
  }
  const std::vector<RunFile> runs = load_runs(dir);
  const Experiment kind = [&] {
    try {
      return experiment_from_string(get<std::string>(manifest, "experiment", "manifest"));
    } catch (const ConfigError& e) {
      throw SchemaMismatch(std::string("manifest: ") + e.what());
    }
  }();
  std::string table;
  switch (kind) {
    case Experiment::MomentConvergence:
      table = moments_table(runs);
      break;
    case Experiment::Robustness:
      table = robustness_table(runs);
      break;
    default:
      table = optimization_table(runs, manifest);
      break;
  }
  write_text(dir / "aggregate.csv", table);
  write_text(dir / "timing.csv", timing_table(runs));
}

std::string plot_data(const fs::path& aggregate_csv, const std::string& kind) {
  const Table t = read_table(aggregate_csv);
  std::ostringstream out;
  if (kind == "convergence") {
    const std::size_t n = t.column("n_params"), m = t.column("method");
    const std::size_t j = t.column("median_J"), s = t.column("success_prob"),
                      e = t.column("median_evals");
    out << "n_params,method,panel,value\n";
    for (const auto& r : t.rows) {
      out << r[n] << ',' << r[m] << ",median_J," << r[j] << '\n';
      out << r[n] << ',' << r[m] << ",success_prob," << r[s] << '\n';
      out << r[n] << ',' << r[m] << ",median_evals," << r[e] << '\n';
    }
  } else if (kind == "heatmap") {
    const std::size_t b = t.column("duration_bin"), np = t.column("layer_size"),
                      s = t.column("success_prob");
    out << "total_duration_bin,NP,success_prob\n";
    for (const auto& r : t.rows) out << r[b] << ',' << r[np] << ',' << r[s] << '\n';
  } else if (kind == "moments") {
    const std::size_t v = t.column("series"), tt = t.column("t"), x = t.column("NL_times_NP"),
                      d = t.column("median_delta"), p = t.column("plateau");
    out << "series,t,NL_times_NP,delta,plateau\n";
    for (const auto& r : t.rows) {
      out << r[v] << ',' << r[tt] << ',' << r[x] << ',' << r[d] << ',' << r[p] << '\n';
    }
  } else if (kind == "robustness") {
    const std::size_t m = t.column("method"), c = t.column("channel"), s = t.column("sigma"),
                      d = t.column("mean_delta_j"), b = t.column("bound");
    out << "method,channel,sigma,mean_delta_j,bound\n";
    for (const auto& r : t.rows) {
      out << r[m] << ',' << r[c] << ',' << r[s] << ',' << r[d] << ',' << r[b] << '\n';
    }
  } else if (kind == "scaling") {
    const std::size_t d = t.column("dimension"), s = t.column("median_seconds"),
                      m = t.column("method");
    out << "dimension,median_seconds,method\n";
    for (const auto& r : t.rows) out << r[d] << ',' << r[s] << ',' << r[m] << '\n';
  } else {
    throw ConfigError("plot-data: unknown kind '" + kind + "'");
  }
  return out.str();
}

}  // namespace rally::harness
