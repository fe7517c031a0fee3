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

#include "rally/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rally/errors.hpp"
#include "rally/tolerances.hpp"

namespace rally {

Rng substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

namespace {

Eigen::VectorXcd phases(const RealVector& lambda, double t) {
  Eigen::VectorXcd out(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const double angle = -t * lambda(k);
    out(k) = Complex(std::cos(angle), std::sin(angle));
  }
  return out;
}

}  // namespace

OperatorMatrix EigenSystem::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

OperatorMatrix EigenSystem::exponential(double t) const {
  OperatorMatrix scaled = eigenvectors;
  scaled.array().rowwise() *= phases(eigenvalues, t).transpose().array();
  OperatorMatrix out(scaled.rows(), scaled.cols());
  out.noalias() = scaled * eigenvectors.adjoint();
  return out;
}

StateVector EigenSystem::apply_exponential(double t, const StateVector& psi) const {
  StateVector coeffs(psi.size());
  coeffs.noalias() = eigenvectors.adjoint() * psi;
  coeffs.array() *= phases(eigenvalues, t).array();
  StateVector out(psi.size());
  out.noalias() = eigenvectors * coeffs;
  return out;
}

void EigenSystem::left_multiply_exponential(double t, OperatorMatrix& u) const {
  const Eigen::VectorXcd ph = phases(eigenvalues, t);
  if (real_eigenvectors.size() > 0) {
    Eigen::MatrixXd re(u.rows(), u.cols()), im(u.rows(), u.cols());
    re.noalias() = real_eigenvectors.transpose() * u.real();
    im.noalias() = real_eigenvectors.transpose() * u.imag();
    Eigen::MatrixXd pr(u.rows(), u.cols()), pi(u.rows(), u.cols());
    pr = ph.real().asDiagonal() * re - ph.imag().asDiagonal() * im;
    pi = ph.real().asDiagonal() * im + ph.imag().asDiagonal() * re;
    re.noalias() = real_eigenvectors * pr;
    im.noalias() = real_eigenvectors * pi;
    u.real() = re;
    u.imag() = im;
    return;
  }
  OperatorMatrix c(u.rows(), u.cols());
  c.noalias() = eigenvectors.adjoint() * u;
  c = ph.asDiagonal() * c;
  u.noalias() = eigenvectors * c;
}

double EigenSystem::spectral_radius() const {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

double max_abs(const OperatorMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const OperatorMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.adjoint()) <= tol * std::max(1.0, max_abs(a));
}

bool is_unitary(const OperatorMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const OperatorMatrix id = OperatorMatrix::Identity(u.rows(), u.cols());
  return max_abs(u.adjoint() * u - id) <= tol;
}

double hs_norm(const OperatorMatrix& a) { return a.norm(); }

EigenSystem eigh(const OperatorMatrix& a) {
  if (a.rows() != a.cols()) {
    throw NonHermitianInput("eigh: matrix is not square");
  }
  if (!is_hermitian(a, tol::kHermitian)) {
    throw NonHermitianInput("eigh: input fails the Hermitian check");
  }
  EigenSystem sys;
  const bool real_input = a.size() == 0 || a.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real_input) {
    const Eigen::MatrixXd sym = 0.5 * (a.real() + a.real().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    sys.eigenvalues = solver.eigenvalues();
    sys.real_eigenvectors = solver.eigenvectors();
    sys.eigenvectors = sys.real_eigenvectors.cast<Complex>();
  } else {
    const OperatorMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(sym);
    sys.eigenvalues = solver.eigenvalues();
    sys.eigenvectors = solver.eigenvectors();
  }
  return sys;
}

OperatorMatrix expm_i(const OperatorMatrix& a, double t) {
  if (t == 0.0) {
    if (!is_hermitian(a, tol::kHermitian)) {
      throw NonHermitianInput("expm_i: input fails the Hermitian check");
    }
    return OperatorMatrix::Identity(a.rows(), a.cols());
  }
  return eigh(a).exponential(t);
}

OperatorMatrix haar_unitary(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  OperatorMatrix z(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<OperatorMatrix> qr(z);
  OperatorMatrix q = qr.householderQ();
  const OperatorMatrix& r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const double mag = std::abs(r(j, j));
    const Complex phase = mag > 0.0 ? r(j, j) / mag : Complex(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  OperatorMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

StateVector basis_state(int dim, std::int64_t index) {
  if (index < 0 || index >= dim) {
    throw IndexOutOfRange("basis_state: index " + std::to_string(index) + " outside dimension " +
                          std::to_string(dim));
  }
  StateVector psi = StateVector::Zero(dim);
  psi(index) = 1.0;
  return psi;
}

StateVector ghz_state(int n) {
  const std::int64_t dim = std::int64_t{1} << n;
  StateVector psi = StateVector::Zero(dim);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(dim - 1) = 1.0 / std::sqrt(2.0);
  return psi;
}

OperatorMatrix single_qubit_density(const StateVector& state, int n, int site) {
  const std::int64_t dim = std::int64_t{1} << n;
  if (state.size() != dim) {
    throw DimensionMismatch("single_qubit_density: state dimension " +
                            std::to_string(state.size()) + " is not 2^" + std::to_string(n));
  }
  if (site < 0 || site >= n) {
    throw IndexOutOfRange("single_qubit_density: site " + std::to_string(site));
  }
  const std::int64_t bit = std::int64_t{1} << site;
  OperatorMatrix rho = OperatorMatrix::Zero(2, 2);
  for (std::int64_t b = 0; b < dim; ++b) {
    if (b & bit) continue;
    const Complex a0 = state(b);
    const Complex a1 = state(b | bit);
    rho(0, 0) += a0 * std::conj(a0);
    rho(1, 1) += a1 * std::conj(a1);
    rho(0, 1) += a0 * std::conj(a1);
  }
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

double entanglement_entropy(const StateVector& state, int n, LogBase base) {
  if (n < 1 || state.size() != (std::int64_t{1} << n)) {
    throw DimensionMismatch("entanglement_entropy: state dimension " +
                            std::to_string(state.size()) + " is not 2^" + std::to_string(n));
  }
  double total = 0.0;
  for (int site = 0; site < n; ++site) {
    const EigenSystem es = eigh(single_qubit_density(state, n, site));
    for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k) {
      const double p = es.eigenvalues(k);
      if (p > 1e-300) total -= p * std::log(p);
    }
  }
  if (base == LogBase::Two) total /= std::log(2.0);
  return total / n;
}

}  // namespace rally
