#include <numbers>

#include "rally/analysis.hpp"
#include "rally/errors.hpp"
#include "test_support.hpp"

using namespace rally;
using namespace rally::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent closure: vectorize real and imaginary parts, grow the span by
// all pairwise commutators until the SVD rank stops changing.
int brute_force_dla(const OperatorMatrix& h0, const OperatorMatrix& hc) {
  const int n = static_cast<int>(h0.rows());
  auto traceless = [&](OperatorMatrix m) {
    m -= (m.trace() / static_cast<double>(n)) * OperatorMatrix::Identity(n, n);
    return m;
  };
  std::vector<OperatorMatrix> elems = {traceless(h0), traceless(hc)};
  auto rank_of = [&](const std::vector<OperatorMatrix>& set) {
    Eigen::MatrixXd m(2 * n * n, set.size());
    for (std::size_t k = 0; k < set.size(); ++k) {
      for (int i = 0; i < n * n; ++i) {
        m(i, k) = set[k](i % n, i / n).real();
        m(n * n + i, k) = set[k](i % n, i / n).imag();
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const RealVector s = svd.singularValues();
    int r = 0;
    for (int i = 0; i < s.size(); ++i) r += s(i) > 1e-9 * s(0);
    return r;
  };
  int rank = rank_of(elems);
  for (;;) {
    std::vector<OperatorMatrix> next = elems;
    for (std::size_t a = 0; a < elems.size(); ++a) {
      for (std::size_t b = a + 1; b < elems.size(); ++b) {
        next.push_back(Complex(0.0, 1.0) * (elems[a] * elems[b] - elems[b] * elems[a]));
      }
    }
    const int r = rank_of(next);
    if (r == rank) return rank;
    // keep a spanning subset to bound growth: greedy independent columns
    std::vector<OperatorMatrix> basis;
    for (const auto& e : next) {
      basis.push_back(e);
      if (rank_of(basis) < static_cast<int>(basis.size())) basis.pop_back();
    }
    elems = basis;
    rank = r;
  }
}

}  // namespace

TEST_CASE("Haar variance table", "[analysis][moments]") {
  CHECK(haar_sigma(1) == 1.0);
  CHECK_THAT(haar_sigma(2), WithinRel(std::sqrt(20.0), 1e-15));
  CHECK_THAT(haar_sigma(3), WithinRel(std::sqrt(658.0), 1e-15));
  CHECK_THAT(haar_sigma(4), WithinRel(std::sqrt(32748.0), 1e-15));
  CHECK_THROWS_AS(haar_sigma(5), OrderUnsupported);
  CHECK_THROWS_AS(haar_sigma(0), OrderUnsupported);
}

TEST_CASE("constant sampler", "[analysis][moments]") {
  const UnitarySampler identity = [](Rng&) { return OperatorMatrix::Identity(8, 8); };
  const MomentEstimate e = moment_gap(identity, 1, 1000, 1);
  CHECK(e.frame_potential == 64.0);
  CHECK(e.delta == 63.0);
  CHECK(e.plateau > 0.0);
  CHECK_THROWS_AS(moment_gap(identity, 1, 999, 1), ConstraintViolation);
  CHECK_THROWS_AS(moment_gap(identity, 5, 1000, 1), OrderUnsupported);
}

TEST_CASE("Haar sampler sits on the plateau", "[analysis][moments][property]") {
  const int orders[] = {1, 2, 3, 4};
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (const MomentEstimate& e : moment_gaps(haar_sampler(4), orders, 20000, seed)) {
      CAPTURE(seed, e.t, e.frame_potential);
      CHECK(e.delta <= 5.0 * e.plateau);
    }
  }
}

TEST_CASE("moment estimates do not depend on the worker count", "[analysis][moments]") {
  const int orders[] = {1, 2};
  const auto a = moment_gaps(haar_sampler(4), orders, 10000, 9, 1);
  const auto b = moment_gaps(haar_sampler(4), orders, 10000, 9, 3);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a[k].frame_potential == b[k].frame_potential);
    CHECK(a[k].sample_sigma == b[k].sample_sigma);
  }
}

TEST_CASE("fixed-amplitude estimator against a quadrature oracle", "[analysis][moments]") {
  // 1 qubit, H0 = Hc = sigma_z, frozen u: |tr(U1^dagger U2)|^2 = 4 cos^2((1+u)(tau2 - tau1))
  ControlSystem sys;
  sys.drift = pauli('z');
  sys.control = pauli('z');
  const PulseSequence frozen = PulseSequence::rally_t(sys.amplitudes, 1, 1, 3);
  const double c = 1.0 + frozen.amplitudes(0, 0);
  const double tmax = 10.0;
  // Delta = tau2 - tau1 has the triangular density (T - |Delta|) / T^2 on [-T, T]
  const int steps = 200000;
  const double h = 2 * tmax / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double d = -tmax + i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * (tmax - std::abs(d)) / (tmax * tmax) * 4.0 * std::pow(std::cos(c * d), 2);
  }
  integral *= h / 3.0;

  const long pairs = 200000;
  const MomentEstimate e = moment_gap_fixed_amplitudes(sys, frozen, 1, pairs, 4, 1, tmax);
  CHECK(std::abs(e.frame_potential - integral) <= 5.0 * e.sample_sigma / std::sqrt(double(pairs)));
}

TEST_CASE("zero-duration ensemble is maximally far from Haar", "[analysis][moments]") {
  Rng rng(5);
  const ControlSystem sys = random_system(4, rng);
  const PulseSequence frozen = PulseSequence::rally_t(sys.amplitudes, 3, 2, 1);
  const MomentEstimate e = moment_gap_fixed_amplitudes(sys, frozen, 2, 1000, 1, 1, 0.0);
  CHECK_THAT(e.frame_potential, WithinRel(256.0, 1e-12));
  CHECK_THAT(e.delta, WithinRel(254.0, 1e-12));
}

TEST_CASE("RALLY_T ensemble approaches Haar with depth", "[analysis][moments]") {
  const double h[] = {0.9, 0.6, 0.75};
  const ControlSystem sys = build_ising(3, h, h);
  const MomentEstimate shallow = moment_gap(rally_t_sampler(sys, 2, 2), 2, 4000, 1);
  const MomentEstimate deep = moment_gap(rally_t_sampler(sys, 17, 2), 2, 4000, 1);
  CHECK(deep.delta < shallow.delta);
}

TEST_CASE("RALLY_T moment gap decays exponentially before the plateau",
          "[analysis][moments][property]") {
  // The 3-spin ensemble reaches the t = 2 plateau within ~17 pulses, so the
  // decay is resolved on shallow sequences.
  Rng field_rng = substream(11, 3);
  const auto [hx, hz] = random_ising_fields(3, field_rng);
  const ControlSystem sys = build_ising(3, hx, hz);
  std::vector<double> xs, ys;
  for (int nl : {1, 2, 3, 4, 6, 8}) {
    const MomentEstimate e = moment_gap(rally_t_sampler(sys, nl, 1), 2, 20000, 5);
    CAPTURE(nl, e.delta, e.plateau);
    if (e.delta < 10.0 * e.plateau) continue;
    xs.push_back(nl);
    ys.push_back(std::log(e.delta));
  }
  REQUIRE(xs.size() >= 4);
  const LinearFit fit = linear_fit(xs, ys);
  CHECK(fit.slope < 0.0);
  CHECK(fit.r_squared >= 0.9);
}

TEST_CASE("linear fit and median", "[analysis]") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> y = {-1.0, -3.0, -5.0, -7.0};
  const LinearFit f = linear_fit(x, y);
  CHECK_THAT(f.slope, WithinAbs(-2.0, 1e-14));
  CHECK_THAT(f.intercept, WithinAbs(1.0, 1e-14));
  CHECK_THAT(f.r_squared, WithinAbs(1.0, 1e-14));
  CHECK_THROWS_AS(linear_fit(std::span(x).first(1), std::span(y).first(1)), LengthMismatch);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}

TEST_CASE("DLA examples", "[analysis][dla]") {
  const DlaReport su2 = dla_rank(pauli('z'), pauli('x'));
  CHECK(su2.dim_found == 3);
  CHECK(su2.dim_full == 3);
  CHECK(su2.controllable);
  CHECK(brute_force_dla(pauli('z'), pauli('x')) == 3);

  const DlaReport commuting = dla_rank(pauli('z'), pauli('z'));
  CHECK(commuting.dim_found == 1);
  CHECK_FALSE(commuting.controllable);

  const OperatorMatrix local_z = kron(pauli('z'), pauli('i'));
  const OperatorMatrix local_x = kron(pauli('x'), pauli('i'));
  CHECK(dla_rank(local_z, local_x).dim_found == 3);

  CHECK_THROWS_AS(dla_rank(OperatorMatrix::Identity(128, 128), OperatorMatrix::Identity(128, 128)),
                  DimensionTooLarge);
  OperatorMatrix bad = pauli('x');
  bad(0, 1) = 2.0;
  CHECK_THROWS_AS(dla_rank(pauli('z'), bad), NonHermitianInput);
}

TEST_CASE("DLA rank agrees with a brute-force closure", "[analysis][dla][property]") {
  Rng rng(6);
  const OperatorMatrix sym_z = kron(pauli('z'), pauli('i')) + kron(pauli('i'), pauli('z'));
  const OperatorMatrix sym_x = kron(pauli('x'), pauli('i')) + kron(pauli('i'), pauli('x'));
  CHECK(dla_rank(sym_z, sym_x).dim_found == brute_force_dla(sym_z, sym_x));
  for (int dim : {2, 3, 4}) {
    const OperatorMatrix a = random_hermitian(dim, rng, dim % 2 == 0);
    const OperatorMatrix b = random_hermitian(dim, rng, false);
    CHECK(dla_rank(a, b).dim_found == brute_force_dla(a, b));
  }
}

TEST_CASE("DLA rank is basis independent", "[analysis][dla][property]") {
  Rng rng(7);
  const double hx[] = {0.6, 0.8}, hz[] = {0.7, 0.9};
  const ControlSystem sys = build_ising(2, hx, hz);
  const OperatorMatrix v = haar_unitary(4, rng);
  const DlaReport plain = dla_rank(sys);
  const DlaReport rotated =
      dla_rank(v * sys.drift * v.adjoint(), v * sys.control * v.adjoint());
  CHECK(plain.dim_found == rotated.dim_found);
  CHECK(plain.dim_found == 15);
  const OperatorMatrix sym_z = kron(pauli('z'), pauli('i')) + kron(pauli('i'), pauli('z'));
  const OperatorMatrix sym_x = kron(pauli('x'), pauli('i')) + kron(pauli('i'), pauli('x'));
  CHECK(dla_rank(sym_z, sym_x).dim_found ==
        dla_rank(v * sym_z * v.adjoint(), v * sym_x * v.adjoint()).dim_found);
}

TEST_CASE("parameter bounds", "[analysis]") {
  CHECK(parameter_bound(ControlTask::UnitarySynthesis, 8) == 63);
  CHECK(parameter_bound(ControlTask::StateTransfer, 2) == 2);
  CHECK(parameter_bound(ControlTask::StateTransfer, 64) == 126);
  CHECK(parameter_bound(ControlTask::StateTransfer, 16) == 30);
}

TEST_CASE("robustness bound arithmetic", "[analysis][robustness]") {
  ControlSystem sys;
  sys.drift = pauli('z');
  sys.control = pauli('x');
  sys.amplitudes = AmplitudeDomain::discrete({1.0, -1.0});
  PulseSequence seq = PulseSequence::rally_t(sys.amplitudes, 4, 3, 2);
  seq.params = {0.5, 1.0, 1.5, 2.0};
  // every pulse has ||sigma_z +- sigma_x||_HS = 2
  const double k = std::sqrt(2.0 / std::numbers::pi);
  const double su = 1e-3, st = 2e-3;
  const double hc = std::sqrt(2.0);
  CHECK_THAT(robustness_bound(sys, seq, su, st, DurationNoise::PerLayer),
             WithinRel(2 * k * (st / 3 * 12 * 2.0 + su * hc * 5.0), 1e-14));
  CHECK_THAT(robustness_bound(sys, seq, su, st, DurationNoise::PerPulse),
             WithinRel(2 * k * (st * 12 * 2.0 + su * hc * 5.0), 1e-14));

  // GRAPE with M = N_L steps at matched total time
  const PulseSequence g = PulseSequence::grape({1.0, -1.0, 1.0, -1.0}, 1.25);
  const double rt = robustness_bound(sys, seq, 0.0, st, DurationNoise::PerPulse);
  const double gr = robustness_bound(sys, g, 0.0, st, DurationNoise::PerPulse);
  CHECK_THAT(rt / gr, WithinRel(3.0, 1e-14));
  CHECK_THAT(robustness_bound(sys, seq, su, 0.0), WithinRel(robustness_bound(sys, g, su, 0.0), 1e-14));
  const PulseSequence a = PulseSequence::rally_a(sys.amplitudes, 2, 2, 0.1, 1);
  CHECK_THROWS_AS(robustness_bound(sys, a, su, st), UnsupportedSequence);
}

TEST_CASE("robustness study", "[analysis][robustness]") {
  Rng rng(8);
  const ControlSystem sys = random_system(4, rng, false);
  PulseSequence seq = PulseSequence::rally_t(sys.amplitudes, 5, 3, 4);
  seq.params = {0.8, 1.2, 0.6, 0.9, 1.1};
  const StateVector psi0 = basis_state(4, 0);
  // nominal solution is exact, so Delta J is the perturbed infidelity
  const FigureOfMerit fom = FigureOfMerit::state(psi0, rally_t_propagator(sys, seq) * psi0);

  Rng noise(9);
  const RobustnessReport zero = robustness_study(sys, seq, fom, 0.0, 0.0, 20, noise);
  CHECK(zero.mean_delta_j == 0.0);
  CHECK(zero.nominal_fom < 1e-14);

  for (DurationNoise mode : {DurationNoise::PerLayer, DurationNoise::PerPulse}) {
    for (double sigma : {1e-6, 1e-4}) {
      const RobustnessReport u = robustness_study(sys, seq, fom, sigma, 0.0, 100, noise, mode);
      const RobustnessReport t = robustness_study(sys, seq, fom, 0.0, sigma, 100, noise, mode);
      CHECK(u.mean_delta_j >= 0.0);
      CHECK(u.mean_delta_j <= 2.0 * u.bound);
      CHECK(t.mean_delta_j <= 2.0 * t.bound);
      CHECK(u.samples == 100);
    }
  }

  const PulseSequence g = PulseSequence::grape({0.3, -0.5, 0.9}, 0.4);
  const FigureOfMerit fg = FigureOfMerit::state(psi0, grape_propagator(sys, g.params, 0.4) * psi0);
  const RobustnessReport rg = robustness_study(sys, g, fg, 1e-5, 1e-5, 50, noise);
  CHECK(rg.mean_delta_j <= 2.0 * rg.bound);
}

TEST_CASE("scaling study bookkeeping", "[analysis][scaling]") {
  const int qubits[] = {2, 3};
  const std::uint64_t seeds[] = {1, 2};
  OptimizerConfig cfg;
  cfg.method = OptimizerMethod::BoundedQuasiNewton;
  const auto problem = [](int n, std::uint64_t seed) { return ising_ghz_problem(n, seed, true); };
  const auto spec = [](int n) {
    SolveSpec s;
    s.method = SequenceKind::RallyT;
    s.n_layers = 2 * (1 << n) - 2;
    s.layer_size = 2;
    return s;
  };
  // every start already meets a trivial target
  const ScalingReport trivial = scaling_study(problem, spec, cfg, qubits, seeds, 1.0, 10.0);
  REQUIRE(trivial.points.size() == 2);
  for (const ScalingPoint& p : trivial.points) {
    CHECK(p.success_fraction == 1.0);
    for (long e : p.evaluations) CHECK(e == 1);
  }
  CHECK(trivial.method == "rally_t");

  cfg.max_fom_evals = 40;
  const ScalingReport a = scaling_study(problem, spec, cfg, qubits, seeds, 1e-3, 60.0);
  const ScalingReport b = scaling_study(problem, spec, cfg, qubits, seeds, 1e-3, 60.0);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].evaluations == b.points[i].evaluations);
    CHECK(a.points[i].final_fom == b.points[i].final_fom);
    CHECK(a.points[i].dimension == (1 << qubits[i]));
  }
  CHECK_THROWS_AS(scaling_study(problem, spec, cfg, qubits, seeds, 1e-3, 0.0), ConfigError);
}
