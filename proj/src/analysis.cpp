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

#include "rally/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "rally/errors.hpp"
#include "rally/tolerances.hpp"

namespace rally {

namespace {

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

constexpr long kChunkPairs = 4096;

double factorial(int t) {
  double f = 1.0;
  for (int k = 2; k <= t; ++k) f *= k;
  return f;
}

}  // namespace

double haar_sigma(int t) {
  static constexpr double kVariance[] = {1.0, 20.0, 658.0, 32748.0};
  if (t < 1 || t > 4) throw OrderUnsupported("moment order " + std::to_string(t) + " not in 1..4");
  return std::sqrt(kVariance[t - 1]);
}

std::vector<MomentEstimate> moment_gaps(const UnitarySampler& sampler, std::span<const int> orders,
                                        long pairs, std::uint64_t seed, int workers) {
  for (int t : orders) haar_sigma(t);
  if (pairs < 1000) throw ConstraintViolation("moment_gap: need at least 1000 pairs");
  const std::size_t n_orders = orders.size();
  const long n_chunks = (pairs + kChunkPairs - 1) / kChunkPairs;

  // per chunk: sum of X^t and of X^{2t} for every order
  std::vector<std::vector<CompensatedSum>> partial(n_chunks,
                                                   std::vector<CompensatedSum>(2 * n_orders));
  std::atomic<long> next{0};
  auto work = [&]() {
    for (long c = next++; c < n_chunks; c = next++) {
      Rng rng = substream(seed, static_cast<std::uint64_t>(c));
      const long begin = c * kChunkPairs;
      const long end = std::min(pairs, begin + kChunkPairs);
      auto& acc = partial[c];
      for (long i = begin; i < end; ++i) {
        const OperatorMatrix u = sampler(rng);
        const OperatorMatrix v = sampler(rng);
        const double x = std::norm(u.conjugate().cwiseProduct(v).sum());
        for (std::size_t k = 0; k < n_orders; ++k) {
          const double xt = std::pow(x, orders[k]);
          acc[2 * k].add(xt);
          acc[2 * k + 1].add(xt * xt);
        }
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(n_chunks)));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<MomentEstimate> out;
  for (std::size_t k = 0; k < n_orders; ++k) {
    CompensatedSum s1, s2;
    for (const auto& acc : partial) {
      s1.add(acc[2 * k].value());
      s2.add(acc[2 * k + 1].value());
    }
    MomentEstimate e;
    e.t = orders[k];
    e.pairs = pairs;
    e.frame_potential = s1.value() / static_cast<double>(pairs);
    e.delta = std::abs(e.frame_potential - factorial(e.t));
    e.sigma_t = haar_sigma(e.t);
    e.plateau = e.sigma_t / std::sqrt(static_cast<double>(pairs));
    const double var = s2.value() / static_cast<double>(pairs) - e.frame_potential * e.frame_potential;
    e.sample_sigma = std::sqrt(std::max(0.0, var));
    out.push_back(e);
  }
  return out;
}

MomentEstimate moment_gap(const UnitarySampler& sampler, int t, long pairs, std::uint64_t seed,
                          int workers) {
  const int orders[] = {t};
  return moment_gaps(sampler, orders, pairs, seed, workers).front();
}

UnitarySampler haar_sampler(int dim) {
  return [dim](Rng& rng) { return haar_unitary(dim, rng); };
}

UnitarySampler rally_t_sampler(const ControlSystem& sys, int n_layers, int layer_size,
                               double tau_max) {
  if (n_layers < 1 || layer_size < 1) throw ConstraintViolation("sampler: empty layer layout");
  // Real symmetric systems skip the generic eigh checks; the per-pulse
  // eigendecomposition dominates the cost of moment estimation.
  const bool real = sys.drift.imag().cwiseAbs().maxCoeff() == 0.0 &&
                    sys.control.imag().cwiseAbs().maxCoeff() == 0.0;
  const Eigen::MatrixXd h0 = sys.drift.real(), hc = sys.control.real();
  return [sys, real, h0, hc, n_layers, layer_size, tau_max](Rng& rng) {
    std::uniform_real_distribution<double> duration(0.0, tau_max);
    OperatorMatrix u = OperatorMatrix::Identity(sys.dim(), sys.dim());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sys.dim());
    Eigen::MatrixXd h(sys.dim(), sys.dim());
    EigenSystem es;
    for (int l = 0; l < n_layers; ++l) {
      const double dt = duration(rng) / layer_size;
      for (int p = 0; p < layer_size; ++p) {
        const double amp = sys.amplitudes.sample(rng);
        if (real) {
          h = h0 + amp * hc;
          solver.compute(h);
          es.eigenvalues = solver.eigenvalues();
          es.real_eigenvectors = solver.eigenvectors();
          es.left_multiply_exponential(dt, u);
        } else {
          eigh(sys.hamiltonian(amp)).left_multiply_exponential(dt, u);
        }
      }
    }
    return u;
  };
}

UnitarySampler rally_t_duration_sampler(const ControlSystem& sys, const PulseSequence& frozen,
                                        double tau_max) {
  if (frozen.kind != SequenceKind::RallyT) {
    throw UnsupportedSequence("duration sampler needs a RALLY_T template");
  }
  auto cache = std::make_shared<PropagatorCache>();
  std::vector<std::shared_ptr<const EigenSystem>> pulses;
  for (int l = 0; l < frozen.n_layers; ++l) {
    for (int p = 0; p < frozen.layer_size; ++p) {
      pulses.push_back(cache->eigensystem(sys, frozen.amplitudes(l, p)));
    }
  }
  const int dim = sys.dim();
  const int n_layers = frozen.n_layers, layer_size = frozen.layer_size;
  return [pulses, cache, dim, n_layers, layer_size, tau_max](Rng& rng) {
    std::uniform_real_distribution<double> duration(0.0, tau_max);
    OperatorMatrix u = OperatorMatrix::Identity(dim, dim);
    std::size_t k = 0;
    for (int l = 0; l < n_layers; ++l) {
      const double dt = duration(rng) / layer_size;
      for (int p = 0; p < layer_size; ++p) pulses[k++]->left_multiply_exponential(dt, u);
    }
    return u;
  };
}

MomentEstimate moment_gap_fixed_amplitudes(const ControlSystem& sys, const PulseSequence& frozen,
                                           int t, long pairs, std::uint64_t seed, int workers,
                                           double tau_max) {
  return moment_gap(rally_t_duration_sampler(sys, frozen, tau_max), t, pairs, seed, workers);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw LengthMismatch("linear_fit: need two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.points = x.size();
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------

DlaReport dla_rank(const OperatorMatrix& drift, const OperatorMatrix& control) {
  const Eigen::Index n = drift.rows();
  if (control.rows() != n || drift.cols() != n || control.cols() != n) {
    throw DimensionMismatch("dla_rank: drift and control shapes differ");
  }
  if (n > 64) throw DimensionTooLarge("dla_rank: dimension " + std::to_string(n) + " exceeds 64");
  if (!is_hermitian(drift, tol::kHermitian) || !is_hermitian(control, tol::kHermitian)) {
    throw NonHermitianInput("dla_rank: generators must be Hermitian");
  }

  DlaReport report;
  report.dim_full = static_cast<int>(n * n - 1);
  const Eigen::Index len = n * n;
  OperatorMatrix basis(len, std::min<Eigen::Index>(16, report.dim_full));
  int count = 0;
  double residual = 0.0;

  // Orthonormalizes the traceless part of a Hermitian matrix against the basis.
  // `scale` bounds the candidate's norm; a bracket that vanishes analytically
  // leaves only roundoff relative to it.
  auto add = [&](const OperatorMatrix& h, double scale) {
    if (count >= report.dim_full) return;
    OperatorMatrix m = h;
    m.diagonal().array() -= m.trace() / static_cast<double>(n);
    Eigen::Map<StateVector> x(m.data(), len);
    const double before = x.norm();
    if (before == 0.0) return;
    for (int pass = 0; pass < 2 && count > 0; ++pass) {
      const StateVector c = basis.leftCols(count).adjoint() * x;
      x -= basis.leftCols(count) * c;
      if (pass == 1) residual = std::max(residual, c.cwiseAbs().maxCoeff() / before);
    }
    const double after = x.norm();
    if (after <= tol::kDlaIndependence * std::max(before, scale)) return;
    if (count == basis.cols()) {
      basis.conservativeResize(len, std::min<Eigen::Index>(2 * basis.cols(), report.dim_full));
    }
    basis.col(count++) = x / after;
  };

  add(drift, hs_norm(drift));
  add(control, hs_norm(control));
  const OperatorMatrix* generators[] = {&drift, &control};
  const double bracket_scale[] = {2.0 * hs_norm(drift), 2.0 * hs_norm(control)};
  const Complex i_unit(0.0, 1.0);
  for (int k = 0; k < count && count < report.dim_full; ++k) {
    const OperatorMatrix e = Eigen::Map<const OperatorMatrix>(basis.col(k).data(), n, n);
    for (int j = 0; j < 2; ++j) {
      add(i_unit * (*generators[j] * e - e * *generators[j]), bracket_scale[j]);
    }
  }
  report.dim_found = count;
  report.controllable = count == report.dim_full;
  report.basis_residual = residual;
  return report;
}

DlaReport dla_rank(const ControlSystem& sys) { return dla_rank(sys.drift, sys.control); }

long parameter_bound(ControlTask task, long dim) {
  if (dim < 2) throw ConstraintViolation("parameter_bound: dimension must be >= 2");
  return task == ControlTask::StateTransfer ? 2 * dim - 2 : dim * dim - 1;
}

// ---------------------------------------------------------------------------

double robustness_bound(const ControlSystem& sys, const PulseSequence& seq, double sigma_u,
                        double sigma_tau, DurationNoise noise) {
  if (seq.kind != SequenceKind::RallyT && seq.kind != SequenceKind::Grape) {
    throw UnsupportedSequence("robustness_bound: RALLY_T or GRAPE sequences only");
  }
  double h_sum = 0.0;
  for (int l = 0; l < seq.n_layers; ++l) {
    for (int p = 0; p < seq.layer_size; ++p) {
      h_sum += hs_norm(sys.hamiltonian(seq.effective_amplitude(l, p)));
    }
  }
  const double tau_factor =
      noise == DurationNoise::PerLayer ? sigma_tau / seq.layer_size : sigma_tau;
  const double propagator_bound = std::sqrt(2.0 / std::numbers::pi) *
                                  (tau_factor * h_sum +
                                   sigma_u * hs_norm(sys.control) * seq.total_duration());
  return 2.0 * propagator_bound;
}

RobustnessReport robustness_study(const ControlSystem& sys, const PulseSequence& seq,
                                  const FigureOfMerit& fom, double sigma_u, double sigma_tau,
                                  long n_samples, Rng& rng, DurationNoise noise) {
  if (n_samples < 1) throw ConstraintViolation("robustness_study: need at least one sample");
  PulseSequence nominal = seq;
  nominal.enforce_amplitude_bounds = false;
  const Schedule base = compile(sys, nominal);

  RobustnessReport report;
  report.sigma_u = sigma_u;
  report.sigma_tau = sigma_tau;
  report.samples = n_samples;
  report.nominal_fom = fom.evaluate(base);
  report.bound = robustness_bound(sys, seq, sigma_u, sigma_tau, noise);

  std::normal_distribution<double> gauss(0.0, 1.0);
  CompensatedSum total;
  std::vector<double> layer_shift(seq.n_layers);
  for (long s = 0; s < n_samples; ++s) {
    for (double& d : layer_shift) d = sigma_tau * gauss(rng) / seq.layer_size;
    Schedule perturbed = base;
    for (Segment& seg : perturbed.segments) {
      if (seg.fixed) continue;
      const double shift =
          noise == DurationNoise::PerLayer ? layer_shift[seg.param] : sigma_tau * gauss(rng);
      const double du = sigma_u * gauss(rng);
      seg.duration += shift;
      if (du != 0.0) {
        seg.amplitude += du;
        seg.eigensystem = std::make_shared<const EigenSystem>(eigh(sys.hamiltonian(seg.amplitude)));
      }
    }
    total.add(std::abs(fom.evaluate(perturbed) - report.nominal_fom));
  }
  report.mean_delta_j = total.value() / static_cast<double>(n_samples);
  return report;
}

// ---------------------------------------------------------------------------

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::pair<ControlSystem, FigureOfMerit> ising_ghz_problem(int n, std::uint64_t seed,
                                                          bool discrete_amplitudes) {
  Rng rng = substream(seed, 2);
  const auto [hx, hz] = random_ising_fields(n, rng);
  const AmplitudeDomain domain =
      discrete_amplitudes ? AmplitudeDomain::discrete({1.0, -1.0}, std::make_pair(-1.0, 1.0))
                          : AmplitudeDomain::interval(-1.0, 1.0);
  ControlSystem sys = build_ising(n, hx, hz, domain);
  FigureOfMerit fom = FigureOfMerit::state(basis_state(sys.dim(), 0), ghz_state(n));
  return {std::move(sys), std::move(fom)};
}

ScalingReport scaling_study(const ProblemFactory& problem, const SpecFactory& spec_for,
                            const OptimizerConfig& config, std::span<const int> qubit_counts,
                            std::span<const std::uint64_t> seeds, double target_fom,
                            double budget_seconds) {
  if (!(budget_seconds > 0.0)) throw ConfigError("scaling_study: budget must be positive");
  if (seeds.empty()) throw ConfigError("scaling_study: no seeds");
  ScalingReport report;
  for (int n : qubit_counts) {
    ScalingPoint point;
    point.n_qubits = n;
    point.dimension = 1 << n;
    int successes = 0;
    for (std::uint64_t seed : seeds) {
      auto [sys, fom] = problem(n, seed);
      SolveSpec spec = spec_for(n);
      spec.seed = seed;
      report.method = to_string(spec.method);
      OptimizerConfig cfg = config;
      cfg.target = target_fom;
      cfg.max_seconds = budget_seconds;
      const SolveResult r = solve(sys, fom, spec, cfg);
      point.seconds.push_back(r.preprocessing_seconds + r.run.wall_time);
      point.preprocessing.push_back(r.preprocessing_seconds);
      point.evaluations.push_back(r.run.fom_evaluations);
      point.final_fom.push_back(r.final_fom);
      if (r.final_fom <= target_fom) ++successes;
    }
    point.median_seconds = median(point.seconds);
    point.success_fraction = static_cast<double>(successes) / static_cast<double>(seeds.size());
    report.points.push_back(std::move(point));
  }
  if (report.points.size() >= 2) {
    const std::size_t first = report.points.size() > 4 ? report.points.size() - 4 : 0;
    std::vector<double> lx, ly;
    for (std::size_t i = first; i < report.points.size(); ++i) {
      lx.push_back(std::log(static_cast<double>(report.points[i].dimension)));
      ly.push_back(std::log(report.points[i].median_seconds));
    }
    report.fit = linear_fit(lx, ly);
  }
  return report;
}

}  // namespace rally
