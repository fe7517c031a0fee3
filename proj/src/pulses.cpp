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

#include "rally/pulses.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "rally/errors.hpp"

namespace rally {

const char* to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::RallyT:
      return "rally_t";
    case SequenceKind::RallyA:
      return "rally_a";
    case SequenceKind::Grape:
      return "grape";
    case SequenceKind::Dcrab:
      return "dcrab";
  }
  return "unknown";
}

SequenceKind sequence_kind_from_string(const std::string& name) {
  if (name == "rally_t") return SequenceKind::RallyT;
  if (name == "rally_a") return SequenceKind::RallyA;
  if (name == "grape") return SequenceKind::Grape;
  if (name == "dcrab") return SequenceKind::Dcrab;
  throw ConfigError("unknown sequence kind '" + name + "'");
}

void RiseProfile::validate() const {
  if (!(tau_rise > 0.0)) throw ConstraintViolation("rise profile: tau_rise must be positive");
  if (n_int < 1) throw ConstraintViolation("rise profile: n_int must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ConstraintViolation("rise profile: epsilon must lie in (0, 0.5)");
  }
}

double RiseProfile::steepness() const {
  return 2.0 / tau_rise * std::log((1.0 - epsilon) / epsilon);
}

double RiseProfile::value(double u_from, double u_to, double t) const {
  const double s = 0.5 * (1.0 + std::tanh(0.5 * steepness() * (t - 0.5 * tau_rise)));
  return u_from + (u_to - u_from) * s;
}

PulseSequence PulseSequence::rally_t(const AmplitudeDomain& domain, int n_layers, int layer_size,
                                     std::uint64_t seed) {
  if (n_layers < 1 || layer_size < 1) {
    throw ConstraintViolation("rally_t: n_layers and layer_size must be positive");
  }
  PulseSequence seq;
  seq.kind = SequenceKind::RallyT;
  seq.n_layers = n_layers;
  seq.layer_size = layer_size;
  seq.seed = seed;
  seq.amplitudes.resize(n_layers, layer_size);
  Rng rng(seed);
  for (int l = 0; l < n_layers; ++l) {
    for (int p = 0; p < layer_size; ++p) seq.amplitudes(l, p) = domain.sample(rng);
  }
  seq.params.assign(n_layers, 0.0);
  return seq;
}

PulseSequence PulseSequence::rally_a(const AmplitudeDomain& domain, int n_layers, int layer_size,
                                     double dt, std::uint64_t seed) {
  PulseSequence seq = rally_t(domain, n_layers, layer_size, seed);
  seq.kind = SequenceKind::RallyA;
  seq.dt = dt;
  seq.params.assign(n_layers, 1.0);
  return seq;
}

PulseSequence PulseSequence::grape(std::vector<double> amplitudes, double dt) {
  PulseSequence seq;
  seq.kind = SequenceKind::Grape;
  seq.n_layers = static_cast<int>(amplitudes.size());
  seq.layer_size = 1;
  seq.params = std::move(amplitudes);
  seq.dt = dt;
  return seq;
}

int PulseSequence::pulse_count() const { return n_layers * layer_size; }

double PulseSequence::effective_amplitude(int layer, int p) const {
  switch (kind) {
    case SequenceKind::RallyT:
      return amplitudes(layer, p);
    case SequenceKind::RallyA:
      return params[layer] * amplitudes(layer, p);
    case SequenceKind::Grape:
    case SequenceKind::Dcrab:
      return params[layer];
  }
  return 0.0;
}

double PulseSequence::pulse_duration(int layer) const {
  return kind == SequenceKind::RallyT ? params[layer] / layer_size : dt;
}

double PulseSequence::total_duration() const {
  if (kind == SequenceKind::RallyT) {
    double sum = 0.0;
    for (double tau : params) sum += tau;
    return sum;
  }
  return static_cast<double>(n_layers) * layer_size * dt;
}

// ---------------------------------------------------------------------------

PropagatorCache::RiseKey PropagatorCache::rise_key(double u_from, double u_to,
                                                   const RiseProfile& profile) {
  return {std::bit_cast<std::uint64_t>(u_from), std::bit_cast<std::uint64_t>(u_to),
          std::bit_cast<std::uint64_t>(profile.tau_rise), profile.n_int,
          std::bit_cast<std::uint64_t>(profile.epsilon)};
}

std::shared_ptr<const EigenSystem> PropagatorCache::eigensystem(const ControlSystem& sys,
                                                                double u) {
  const std::uint64_t key = std::bit_cast<std::uint64_t>(u);
  auto it = eigen_.find(key);
  if (it == eigen_.end()) {
    it = eigen_.emplace(key, std::make_shared<const EigenSystem>(eigh(sys.hamiltonian(u)))).first;
  }
  return it->second;
}

std::shared_ptr<const OperatorMatrix> PropagatorCache::rise(const ControlSystem& sys,
                                                            double u_from, double u_to,
                                                            const RiseProfile& profile) {
  const RiseKey key = rise_key(u_from, u_to, profile);
  auto it = rises_.find(key);
  if (it == rises_.end()) {
    it = rises_
             .emplace(key, std::make_shared<const OperatorMatrix>(
                               rise_propagator(sys, u_from, u_to, profile)))
             .first;
  }
  return it->second;
}

std::shared_ptr<const EigenSystem> PropagatorCache::find_eigensystem(double u) const {
  const auto it = eigen_.find(std::bit_cast<std::uint64_t>(u));
  return it == eigen_.end() ? nullptr : it->second;
}

std::shared_ptr<const OperatorMatrix> PropagatorCache::find_rise(double u_from, double u_to,
                                                                 const RiseProfile& profile) const {
  const auto it = rises_.find(rise_key(u_from, u_to, profile));
  return it == rises_.end() ? nullptr : it->second;
}

void PropagatorCache::prepare(const ControlSystem& sys, const PulseSequence& seq) {
  double previous = 0.0;
  bool first = true;
  for (int l = 0; l < seq.n_layers; ++l) {
    for (int p = 0; p < seq.layer_size; ++p) {
      const double u = seq.effective_amplitude(l, p);
      eigensystem(sys, u);
      if (seq.rise && !first &&
          (seq.rise_insertion == RiseInsertion::EveryBoundary || u != previous)) {
        rise(sys, previous, u, *seq.rise);
      }
      previous = u;
      first = false;
    }
  }
}

// ---------------------------------------------------------------------------

OperatorMatrix Segment::matrix() const {
  if (fixed) return *fixed;
  return eigensystem->exponential(duration);
}

StateVector Segment::apply(const StateVector& psi) const {
  if (fixed) return *fixed * psi;
  return eigensystem->apply_exponential(duration, psi);
}

StateVector Segment::apply_adjoint(const StateVector& psi) const {
  if (fixed) return fixed->adjoint() * psi;
  return eigensystem->apply_exponential(-duration, psi);
}

namespace {

// U <- exp(-i t A) U without forming the exponential.
void left_multiply(const EigenSystem& es, double t, OperatorMatrix& u, OperatorMatrix& scratch) {
  scratch.noalias() = es.eigenvectors.adjoint() * u;
  for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k) {
    const double angle = -t * es.eigenvalues(k);
    scratch.row(k) *= Complex(std::cos(angle), std::sin(angle));
  }
  u.noalias() = es.eigenvectors * scratch;
}

}  // namespace

OperatorMatrix Schedule::propagator() const {
  OperatorMatrix u = OperatorMatrix::Identity(dim, dim);
  OperatorMatrix scratch(dim, dim);
  for (const Segment& seg : segments) {
    if (seg.fixed) {
      scratch.noalias() = *seg.fixed * u;
      u.swap(scratch);
    } else {
      left_multiply(*seg.eigensystem, seg.duration, u, scratch);
    }
  }
  return u;
}

StateVector Schedule::evolve(const StateVector& psi) const {
  StateVector out = psi;
  for (const Segment& seg : segments) out = seg.apply(out);
  return out;
}

double Schedule::total_time() const {
  double t = 0.0;
  for (const Segment& seg : segments) t += seg.duration;
  return t;
}

namespace {

constexpr double kAmplitudeSlack = 1e-12;

class EigenLookup {
 public:
  EigenLookup(const ControlSystem& sys, const PropagatorCache* cache) : sys_(sys), cache_(cache) {}

  std::shared_ptr<const EigenSystem> get(double u) {
    if (cache_) {
      if (auto hit = cache_->find_eigensystem(u)) return hit;
    }
    return local_.eigensystem(sys_, u);
  }

  std::shared_ptr<const OperatorMatrix> rise(double from, double to, const RiseProfile& profile) {
    if (cache_) {
      if (auto hit = cache_->find_rise(from, to, profile)) return hit;
    }
    return local_.rise(sys_, from, to, profile);
  }

 private:
  const ControlSystem& sys_;
  const PropagatorCache* cache_;
  PropagatorCache local_;
};

void check_amplitude(const ControlSystem& sys, const PulseSequence& seq, double u) {
  if (!seq.enforce_amplitude_bounds) return;
  const AmplitudeDomain& dom = sys.amplitudes;
  const bool ok = (seq.kind == SequenceKind::RallyT && dom.is_discrete())
                      ? dom.contains(u, kAmplitudeSlack)
                      : (u >= dom.lower() - kAmplitudeSlack && u <= dom.upper() + kAmplitudeSlack);
  if (!ok) {
    throw ConstraintViolation("amplitude " + std::to_string(u) + " outside the amplitude domain");
  }
}

}  // namespace

Schedule compile(const ControlSystem& sys, const PulseSequence& seq,
                 const PropagatorCache* cache) {
  if (static_cast<int>(seq.params.size()) != seq.n_layers) {
    throw LengthMismatch("compile: parameter vector length " + std::to_string(seq.params.size()) +
                         " does not match " + std::to_string(seq.n_layers) + " layers");
  }
  const bool layered = seq.kind == SequenceKind::RallyT || seq.kind == SequenceKind::RallyA;
  if (layered && (seq.amplitudes.rows() != seq.n_layers || seq.amplitudes.cols() != seq.layer_size)) {
    throw LengthMismatch("compile: amplitude matrix shape does not match the layer layout");
  }
  if (!layered && seq.layer_size != 1) {
    throw LengthMismatch("compile: piecewise-constant sequences have one pulse per step");
  }
  if (seq.kind != SequenceKind::RallyT && seq.n_layers > 0 && !(seq.dt > 0.0)) {
    throw ConstraintViolation("compile: dt must be positive");
  }
  if (seq.rise) {
    if (seq.kind != SequenceKind::RallyT) {
      throw UnsupportedSequence("compile: ramps are only supported for RALLY_T sequences");
    }
    seq.rise->validate();
  }

  EigenLookup lookup(sys, cache);
  Schedule out;
  out.dim = sys.dim();
  out.n_params = seq.n_layers;
  out.segments.reserve(static_cast<std::size_t>(seq.pulse_count()) * (seq.rise ? 2 : 1));

  double previous = 0.0;
  bool first = true;
  for (int l = 0; l < seq.n_layers; ++l) {
    const double param = seq.params[l];
    if (seq.kind == SequenceKind::RallyT) {
      if (param < 0.0) {
        throw ConstraintViolation("compile: negative layer duration at layer " + std::to_string(l));
      }
      if (param / seq.layer_size < sys.min_pulse_duration * (1.0 - 1e-12)) {
        throw ConstraintViolation("compile: pulse in layer " + std::to_string(l) +
                                  " is shorter than the minimum pulse duration");
      }
    }
    for (int p = 0; p < seq.layer_size; ++p) {
      const double u = seq.effective_amplitude(l, p);
      check_amplitude(sys, seq, u);
      if (seq.rise && !first &&
          (seq.rise_insertion == RiseInsertion::EveryBoundary || u != previous)) {
        Segment ramp;
        ramp.fixed = lookup.rise(previous, u, *seq.rise);
        ramp.duration = seq.rise->tau_rise;
        out.segments.push_back(std::move(ramp));
      }
      Segment seg;
      seg.eigensystem = lookup.get(u);
      seg.amplitude = u;
      seg.param = l;
      seg.duration = seq.pulse_duration(l);
      switch (seq.kind) {
        case SequenceKind::RallyT:
          seg.role = SegmentRole::Duration;
          seg.weight = 1.0 / seq.layer_size;
          break;
        case SequenceKind::RallyA:
          seg.role = SegmentRole::ControlScale;
          seg.weight = seq.amplitudes(l, p);
          break;
        case SequenceKind::Grape:
        case SequenceKind::Dcrab:
          seg.role = SegmentRole::ControlScale;
          seg.weight = 1.0;
          break;
      }
      out.segments.push_back(std::move(seg));
      previous = u;
      first = false;
    }
  }
  return out;
}

OperatorMatrix rally_t_propagator(const ControlSystem& sys, const PulseSequence& seq,
                                  const PropagatorCache* cache) {
  if (seq.kind != SequenceKind::RallyT) {
    throw UnsupportedSequence("rally_t_propagator: sequence is not RALLY_T");
  }
  return compile(sys, seq, cache).propagator();
}

OperatorMatrix rally_a_propagator(const ControlSystem& sys, const PulseSequence& seq) {
  if (seq.kind != SequenceKind::RallyA) {
    throw UnsupportedSequence("rally_a_propagator: sequence is not RALLY_A");
  }
  return compile(sys, seq).propagator();
}

OperatorMatrix grape_propagator(const ControlSystem& sys, std::span<const double> amplitudes,
                                double dt) {
  const PulseSequence seq =
      PulseSequence::grape(std::vector<double>(amplitudes.begin(), amplitudes.end()), dt);
  return compile(sys, seq).propagator();
}

OperatorMatrix rise_propagator(const ControlSystem& sys, double u_from, double u_to,
                               const RiseProfile& profile) {
  profile.validate();
  const double step = profile.tau_rise / profile.n_int;
  OperatorMatrix u = OperatorMatrix::Identity(sys.dim(), sys.dim());
  OperatorMatrix scratch(sys.dim(), sys.dim());
  for (int n = 1; n <= profile.n_int; ++n) {
    const double amp = profile.value(u_from, u_to, (n - 0.5) * step);
    left_multiply(eigh(sys.hamiltonian(amp)), step, u, scratch);
  }
  return u;
}

OperatorMatrix rally_t_with_bandwidth(const ControlSystem& sys, const PulseSequence& seq,
                                      const RiseProfile& profile,
                                      const PropagatorCache* cache) {
  PulseSequence with_ramps = seq;
  with_ramps.rise = profile;
  return rally_t_propagator(sys, with_ramps, cache);
}

OperatorMatrix propagator(const ControlSystem& sys, const PulseSequence& seq,
                          const PropagatorCache* cache) {
  return compile(sys, seq, cache).propagator();
}

// ---------------------------------------------------------------------------

FourierBasis FourierBasis::random(int count, double bandwidth, Rng& rng) {
  if (count < 0) throw ConstraintViolation("FourierBasis: negative basis size");
  if (!(bandwidth > 0.0)) throw ConstraintViolation("FourierBasis: bandwidth must be positive");
  FourierBasis basis;
  basis.count = count;
  // uniform on (0, bandwidth]
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    basis.frequencies.push_back(bandwidth * (1.0 - uni(rng)));
  }
  return basis;
}

double FourierBasis::value(int index, double t) const {
  const double w = frequencies[index / 2];
  return index % 2 == 0 ? std::cos(w * t) : std::sin(w * t);
}

std::vector<double> time_grid(double total_time, int steps) {
  std::vector<double> t(steps);
  const double dt = total_time / steps;
  for (int j = 0; j < steps; ++j) t[j] = (j + 0.5) * dt;
  return t;
}

std::vector<double> dcrab_field(double c0, std::span<const double> coeffs,
                                const FourierBasis& basis, std::span<const double> previous,
                                std::span<const double> times, const AmplitudeDomain* clip) {
  if (static_cast<int>(coeffs.size()) != basis.count) {
    throw LengthMismatch("dcrab_field: coefficient count does not match the basis");
  }
  if (!previous.empty() && previous.size() != times.size()) {
    throw LengthMismatch("dcrab_field: previous field is sampled on a different grid");
  }
  std::vector<double> field(times.size(), 0.0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    double v = previous.empty() ? 0.0 : c0 * previous[j];
    for (int i = 0; i < basis.count; ++i) v += coeffs[i] * basis.value(i, times[j]);
    field[j] = clip ? clip->clamp(v) : v;
  }
  return field;
}

}  // namespace rally
