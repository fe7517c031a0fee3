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

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rally {

using Complex = std::complex<double>;

/// Dense complex square matrix: Hamiltonians, propagators and observables.
using OperatorMatrix = Eigen::MatrixXcd;

/// Dense complex state vector.
using StateVector = Eigen::VectorXcd;

using RealVector = Eigen::VectorXd;

/// The one random engine used across the toolkit. Every stochastic routine
/// takes it explicitly; nothing holds a global generator.
using Rng = std::mt19937_64;

/// Derives an independent engine for substream `index` of `seed`.
Rng substream(std::uint64_t seed, std::uint64_t index);

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Real symmetric inputs are decomposed with the real solver, which halves
/// the cost for the spin Hamiltonians used throughout; the eigenvectors are
/// still stored as a complex matrix.
struct EigenSystem {
  RealVector eigenvalues;
  OperatorMatrix eigenvectors;
  Eigen::MatrixXd real_eigenvectors;  // set when the input was real symmetric

  int dim() const { return static_cast<int>(eigenvalues.size()); }

  /// V diag(lambda) V^dagger.
  OperatorMatrix reconstruct() const;

  /// exp(-i t A) = V exp(-i t lambda) V^dagger.
  OperatorMatrix exponential(double t) const;

  /// exp(-i t A) applied to a state without forming the matrix.
  StateVector apply_exponential(double t, const StateVector& psi) const;

  /// u <- exp(-i t A) u without forming the exponential.
  void left_multiply_exponential(double t, OperatorMatrix& u) const;

  /// Largest |lambda|.
  double spectral_radius() const;
};

double max_abs(const OperatorMatrix& a);

/// ||A - A^dagger||_max <= tol * max(1, ||A||_max).
bool is_hermitian(const OperatorMatrix& a, double tol);

/// ||U^dagger U - 1||_max <= tol.
bool is_unitary(const OperatorMatrix& u, double tol);

/// Hilbert-Schmidt (Frobenius) norm.
double hs_norm(const OperatorMatrix& a);

/// Throws NonHermitianInput when the symmetry check fails.
EigenSystem eigh(const OperatorMatrix& a);

/// exp(-i t A) through the Hermitian eigendecomposition of A.
OperatorMatrix expm_i(const OperatorMatrix& a, double t);

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of R's diagonal moved into Q.
OperatorMatrix haar_unitary(int dim, Rng& rng);

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b);

// Qubit convention: site i is bit i of the computational-basis index, so
// site 0 is the rightmost Kronecker factor. |0> is the +1 eigenstate of
// sigma_z.

/// |index> in a dim-dimensional space.
StateVector basis_state(int dim, std::int64_t index);

/// (|0...0> + |1...1>)/sqrt(2) on n qubits.
StateVector ghz_state(int n);

enum class PauliAxis { I, X, Y, Z };

struct PauliFactor {
  int site = 0;
  PauliAxis axis = PauliAxis::I;
};

/// coefficient * prod_k sigma^{axis_k}_{site_k}; an empty factor list is the
/// identity.
struct PauliString {
  double coefficient = 0.0;
  std::vector<PauliFactor> factors;
};

/// Sum of the Kronecker expansions of `terms` on n sites (dimension 2^n).
/// Throws IndexOutOfRange for sites >= n and for repeated sites in a term.
OperatorMatrix pauli_expand(std::span<const PauliString> terms, int n);

/// Smallest n that hosts every site referenced by `terms` (at least 1).
int pauli_site_count(std::span<const PauliString> terms);

/// Reads the line-oriented Pauli-term format:
///
///     # comment
///     -0.81054798 I
///     0.12091263 z1 z0
///
/// Axis letters are case-insensitive. Throws ParseError with the offending
/// line number.
std::vector<PauliString> parse_pauli_terms(std::istream& in);
std::vector<PauliString> read_pauli_file(const std::string& path);
void write_pauli_terms(std::ostream& out, std::span<const PauliString> terms);

/// 2x2 reduced density matrix of qubit `site`.
OperatorMatrix single_qubit_density(const StateVector& state, int n, int site);

enum class LogBase { Natural, Two };

/// Average single-qubit von Neumann entropy -(1/n) sum_i Tr[rho_i log rho_i].
/// Natural logarithm unless configured otherwise. Throws DimensionMismatch
/// unless dim == 2^n.
double entanglement_entropy(const StateVector& state, int n, LogBase base = LogBase::Natural);

}  // namespace rally
