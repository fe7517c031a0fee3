#include <numbers>

#include "rally/errors.hpp"
#include "rally/gradients.hpp"
#include "test_support.hpp"

using namespace rally;
using namespace rally::testing;
using Catch::Matchers::WithinAbs;

namespace {

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / std::max(scale, 1e-12);
}

FigureOfMerit random_fom(int kind, int dim, Rng& rng) {
  switch (kind % 3) {
    case 0:
      return FigureOfMerit::unitary(haar_unitary(dim, rng));
    case 1:
      return FigureOfMerit::state(basis_state(dim, 0), haar_unitary(dim, rng).col(0));
    default:
      return FigureOfMerit::energy(basis_state(dim, dim - 1), random_hermitian(dim, rng, false));
  }
}

std::vector<double> uniform(std::size_t n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("Frechet kernel matches the block-exponential derivative", "[gradients][frechet]") {
  Rng rng(1);
  for (int dim : {2, 3, 5}) {
    const OperatorMatrix h = random_hermitian(dim, rng, false);
    const OperatorMatrix hc = random_hermitian(dim, rng, false);
    const double dt = 0.37;
    // d/du exp(-i dt (H + u Hc)) is the upper-right block of exp([[A, E], [0, A]])
    OperatorMatrix block = OperatorMatrix::Zero(2 * dim, 2 * dim);
    block.topLeftCorner(dim, dim) = h;
    block.bottomRightCorner(dim, dim) = h;
    block.topRightCorner(dim, dim) = hc;
    const OperatorMatrix oracle = oracle_expm(block, dt).topRightCorner(dim, dim);

    const EigenSystem es = eigh(h);
    const OperatorMatrix v = es.eigenvectors;
    const OperatorMatrix inner =
        Complex(0.0, -dt) * (v.adjoint() * hc * v).cwiseProduct(frechet_kernel(es.eigenvalues, dt));
    CHECK(max_diff(v * inner * v.adjoint(), oracle) < 1e-12);
  }
}

TEST_CASE("Frechet kernel confluent limit", "[gradients][frechet]") {
  RealVector lambda(3);
  lambda << 0.4, 0.4, -1.1;
  const OperatorMatrix k = frechet_kernel(lambda, 0.5);
  for (int a = 0; a < 3; ++a) {
    CHECK(std::abs(k(a, a) - std::exp(Complex(0.0, -0.5 * lambda(a)))) < 1e-15);
  }
  CHECK(std::abs(k(0, 1) - std::exp(Complex(0.0, -0.2))) < 1e-15);
  // near-degenerate pair: continuous across the switch
  RealVector close(2);
  close << 0.4, 0.4 + 1e-9;
  const OperatorMatrix kc = frechet_kernel(close, 0.5);
  CHECK(std::abs(kc(0, 1) - std::exp(Complex(0.0, -0.2))) < 1e-9);
}

TEST_CASE("finite difference oracle", "[gradients][fd]") {
  const auto square = [](std::span<const double> x) { return x[0] * x[0]; };
  const std::vector<double> three = {3.0};
  CHECK_THAT(finite_difference(square, three).values[0], WithinAbs(6.0, 1e-6));
  const auto constant = [](std::span<const double>) { return 4.2; };
  const std::vector<double> x = {1.0, -2.0, 0.5};
  for (double g : finite_difference(constant, x).values) CHECK(g == 0.0);
  CHECK(finite_difference(constant, x).method == GradientMethod::FiniteDifference);
  CHECK_THROWS_AS(finite_difference(constant, x, 0.0), ConstraintViolation);
}

TEST_CASE("analytic gradients match finite differences", "[gradients][property]") {
  Rng rng(2);
  const int dims[] = {2, 3, 4, 6, 8, 16};
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = dims[trial % 6];
    const ControlSystem sys = random_system(dim, rng, trial % 2 == 0);
    const FigureOfMerit fom = random_fom(trial, dim, rng);
    CAPTURE(trial, dim, to_string(fom.kind));

    PulseSequence t = PulseSequence::rally_t(sys.amplitudes, 4, 3, rng());
    t.params = uniform(4, 0.2, 1.5, rng);
    const GradientResult gt = rally_t_gradient(sys, t, fom);
    const GradientResult ft = finite_difference(
        [&](std::span<const double> p) {
          PulseSequence s = t;
          s.params.assign(p.begin(), p.end());
          return evaluate_sequence(sys, s, fom);
        },
        t.params);
    CHECK(relative_error(gt.values, ft.values) < 1e-5);
    CHECK_THAT(gt.value, WithinAbs(evaluate_sequence(sys, t, fom), 1e-12));

    PulseSequence a = PulseSequence::rally_a(sys.amplitudes, 4, 3, 0.2, rng());
    a.params = uniform(4, 0.1, 0.9, rng);
    const GradientResult ga = rally_a_gradient(sys, a, fom);
    const GradientResult fa = finite_difference(
        [&](std::span<const double> p) {
          PulseSequence s = a;
          s.params.assign(p.begin(), p.end());
          return evaluate_sequence(sys, s, fom);
        },
        a.params);
    CHECK(relative_error(ga.values, fa.values) < 1e-5);

    const std::vector<double> amps = uniform(6, -0.9, 0.9, rng);
    const GradientResult gg = grape_gradient(sys, amps, 0.3, fom);
    const GradientResult fg = finite_difference(
        [&](std::span<const double> p) { return fom.evaluate(grape_propagator(sys, p, 0.3)); },
        amps);
    CHECK(relative_error(gg.values, fg.values) < 1e-5);
    CHECK(gg.method == GradientMethod::AnalyticExact);
  }
}

TEST_CASE("RALLY_T gradient vanishes at the target", "[gradients][rally_t]") {
  Rng rng(3);
  const ControlSystem sys = random_system(2, rng);
  PulseSequence seq = PulseSequence::rally_t(sys.amplitudes, 1, 1, 7);
  seq.params = {0.9};
  const FigureOfMerit fom = FigureOfMerit::unitary(rally_t_propagator(sys, seq));
  const GradientResult g = rally_t_gradient(sys, seq, fom);
  CHECK(std::abs(g.values[0]) < 1e-12);
  CHECK(g.value < 1e-14);
}

TEST_CASE("gradient is small at an interior optimum", "[gradients][property]") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const ControlSystem sys = random_system(4, rng);
    PulseSequence seq = PulseSequence::rally_t(sys.amplitudes, 5, 2, rng());
    seq.params = uniform(5, 0.5, 1.5, rng);
    const StateVector psi0 = basis_state(4, 0);
    const FigureOfMerit fom =
        FigureOfMerit::state(psi0, rally_t_propagator(sys, seq) * psi0);
    const GradientResult g = rally_t_gradient(sys, seq, fom);
    REQUIRE(g.value <= 1e-10);
    double norm = 0.0;
    for (double v : g.values) norm += v * v;
    CHECK(std::sqrt(norm) <= 1e-4);
  }
}

TEST_CASE("RALLY_T gradient in the commuting case", "[gradients][rally_t]") {
  // Hc = H0: U = exp(-i sum_l c_l tau_l H0) with c_l = mean_p (1 + u_lp)
  Rng rng(5);
  ControlSystem sys;
  sys.drift = random_hermitian(3, rng, false);
  sys.control = sys.drift;
  PulseSequence seq = PulseSequence::rally_t(sys.amplitudes, 3, 4, 99);
  seq.params = {0.6, 1.1, 0.4};
  const StateVector psi0 = basis_state(3, 0);
  const StateVector target = haar_unitary(3, rng).col(0);
  const FigureOfMerit fom = FigureOfMerit::state(psi0, target);

  double phase_time = 0.0;
  std::vector<double> c(3, 0.0);
  for (int l = 0; l < 3; ++l) {
    for (int p = 0; p < 4; ++p) c[l] += (1.0 + seq.amplitudes(l, p)) / 4.0;
    phase_time += c[l] * seq.params[l];
  }
  const OperatorMatrix u = expm_i(sys.drift, phase_time);
  const Complex amp = target.dot(u * psi0);
  const Complex damp = target.dot(Complex(0.0, -1.0) * sys.drift * u * psi0);
  const GradientResult g = rally_t_gradient(sys, seq, fom);
  for (int l = 0; l < 3; ++l) {
    const double oracle = -2.0 * c[l] * (std::conj(amp) * damp).real();
    CHECK_THAT(g.values[l], WithinAbs(oracle, 1e-12));
  }
}

TEST_CASE("composite penalty adds 2 lambda sum tau", "[gradients][composite]") {
  Rng rng(6);
  const ControlSystem sys = random_system(4, rng);
  PulseSequence seq = PulseSequence::rally_t(sys.amplitudes, 4, 2, 5);
  seq.params = {0.3, 0.8, 0.5, 1.2};
  FigureOfMerit fom = FigureOfMerit::state(basis_state(4, 0), basis_state(4, 3));
  const GradientResult plain = rally_t_gradient(sys, seq, fom);
  fom.penalty_weight = 1e-2;
  const GradientResult penalized = rally_t_gradient(sys, seq, fom);
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK_THAT(penalized.values[l] - plain.values[l], WithinAbs(2e-2 * 2.8, 1e-14));
  }
  CHECK_THAT(penalized.value - plain.value, WithinAbs(1e-2 * 2.8 * 2.8, 1e-14));
}

TEST_CASE("RALLY_A special cases", "[gradients][rally_a]") {
  Rng rng(7);
  const ControlSystem sys = random_system(4, rng);
  const FigureOfMerit fom = FigureOfMerit::unitary(haar_unitary(4, rng));

  PulseSequence zero = PulseSequence::rally_a(sys.amplitudes, 3, 2, 0.3, 1);
  zero.amplitudes.setZero();
  for (double g : rally_a_gradient(sys, zero, fom).values) CHECK(g == 0.0);

  PulseSequence one = PulseSequence::rally_a(sys.amplitudes, 5, 1, 0.3, 2);
  one.params = uniform(5, 0.1, 0.9, rng);
  std::vector<double> v(5);
  for (int l = 0; l < 5; ++l) v[l] = one.params[l] * one.amplitudes(l, 0);
  const GradientResult ga = rally_a_gradient(sys, one, fom);
  const GradientResult gg = grape_gradient(sys, v, 0.3, fom);
  for (int l = 0; l < 5; ++l) {
    CHECK_THAT(ga.values[l], WithinAbs(gg.values[l] * one.amplitudes(l, 0), 1e-13));
  }
}

TEST_CASE("GRAPE first-order mode", "[gradients][grape]") {
  Rng rng(8);
  SECTION("commuting control: exact and first order coincide") {
    ControlSystem sys;
    sys.drift = pauli('z');
    sys.control = 0.5 * pauli('z');
    const FigureOfMerit fom = FigureOfMerit::unitary(haar_unitary(2, rng));
    const std::vector<double> amps = uniform(8, -1.0, 1.0, rng);
    const GradientResult ex = grape_gradient(sys, amps, 0.2, fom, FrechetMode::Exact);
    const GradientResult fo = grape_gradient(sys, amps, 0.2, fom, FrechetMode::FirstOrder);
    CHECK(fo.method == GradientMethod::AnalyticFirstOrder);
    for (std::size_t j = 0; j < amps.size(); ++j) CHECK_THAT(ex.values[j], WithinAbs(fo.values[j], 1e-14));
  }
  SECTION("discrepancy shrinks linearly with dt") {
    const ControlSystem sys = random_system(4, rng, false);
    const FigureOfMerit fom = FigureOfMerit::state(basis_state(4, 0), haar_unitary(4, rng).col(0));
    const std::vector<double> amps = uniform(10, -0.8, 0.8, rng);
    std::vector<double> err;
    for (double dt : {0.04, 0.02, 0.01}) {
      const GradientResult ex = grape_gradient(sys, amps, dt, fom, FrechetMode::Exact);
      const GradientResult fo = grape_gradient(sys, amps, dt, fom, FrechetMode::FirstOrder);
      err.push_back(relative_error(fo.values, ex.values));
    }
    CHECK(err[0] / err[1] > 1.6);
    CHECK(err[0] / err[1] < 2.5);
    CHECK(err[1] / err[2] > 1.6);
    CHECK(err[1] / err[2] < 2.5);
  }
}

TEST_CASE("RALLY_T gradient with bandwidth ramps", "[gradients][rise]") {
  Rng rng(9);
  ControlSystem sys = random_system(4, rng);
  sys.amplitudes = AmplitudeDomain::discrete({1.0, -1.0});
  const FigureOfMerit fom = FigureOfMerit::state(basis_state(4, 0), haar_unitary(4, rng).col(0));
  for (RiseInsertion mode : {RiseInsertion::AtJumps, RiseInsertion::EveryBoundary}) {
    PulseSequence seq = PulseSequence::rally_t(sys.amplitudes, 4, 3, 17);
    seq.params = uniform(4, 0.5, 1.5, rng);
    seq.rise = RiseProfile{0.2, 20, 1e-6};
    seq.rise_insertion = mode;
    PropagatorCache cache;
    cache.prepare(sys, seq);
    const GradientResult g = rally_t_gradient(sys, seq, fom, &cache);
    const GradientResult f = finite_difference(
        [&](std::span<const double> p) {
          PulseSequence s = seq;
          s.params.assign(p.begin(), p.end());
          return evaluate_sequence(sys, s, fom, &cache);
        },
        seq.params);
    CHECK(relative_error(g.values, f.values) < 1e-5);
  }
}

TEST_CASE("gradients reject mismatched sequence kinds", "[gradients]") {
  Rng rng(10);
  const ControlSystem sys = random_system(2, rng);
  const FigureOfMerit fom = FigureOfMerit::unitary(OperatorMatrix::Identity(2, 2));
  const PulseSequence a = PulseSequence::rally_a(sys.amplitudes, 2, 1, 0.1, 1);
  CHECK_THROWS_AS(rally_t_gradient(sys, a, fom), UnsupportedSequence);
  const PulseSequence t = PulseSequence::rally_t(sys.amplitudes, 2, 1, 1);
  CHECK_THROWS_AS(rally_a_gradient(sys, t, fom), UnsupportedSequence);
}
