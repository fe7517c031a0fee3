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

#include "rally/gradients.hpp"

#include <cmath>
#include <unordered_map>

#include "rally/errors.hpp"
#include "rally/tolerances.hpp"

namespace rally {

OperatorMatrix frechet_kernel(const RealVector& eigenvalues, double dt) {
  const Eigen::Index n = eigenvalues.size();
  const double scale = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double confluent = tol::kConfluent * scale;
  OperatorMatrix phi(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const double angle = -dt * eigenvalues(b);
    const Complex eb(std::cos(angle), std::sin(angle));
    for (Eigen::Index a = 0; a < n; ++a) {
      const double gap = eigenvalues(a) - eigenvalues(b);
      // (e^{iy} - 1) / (iy) with y = -dt * gap, written to avoid cancellation.
      const double y = -dt * gap;
      if (std::abs(gap) <= confluent || y == 0.0) {
        phi(a, b) = eb;
      } else {
        const double s = std::sin(0.5 * y);
        phi(a, b) = eb * Complex(std::sin(y) / y, 2.0 * s * s / y);
      }
    }
  }
  return phi;
}

namespace {

class ControlInEigenbasis {
 public:
  explicit ControlInEigenbasis(const OperatorMatrix& control) : control_(control) {}

  const OperatorMatrix& get(const EigenSystem& es) {
    auto it = cache_.find(&es);
    if (it == cache_.end()) {
      it = cache_.emplace(&es, es.eigenvectors.adjoint() * control_ * es.eigenvectors).first;
    }
    return it->second;
  }

 private:
  const OperatorMatrix& control_;
  std::unordered_map<const EigenSystem*, OperatorMatrix> cache_;
};

// Scalar gradient for the state-based figures of merit.
GradientResult state_gradient(const Schedule& schedule, const FigureOfMerit& fom,
                              const OperatorMatrix& control, FrechetMode mode) {
  const std::size_t k_total = schedule.segments.size();
  std::vector<StateVector> psi(k_total + 1);
  psi[0] = fom.initial_state;
  for (std::size_t k = 0; k < k_total; ++k) psi[k + 1] = schedule.segments[k].apply(psi[k]);

  GradientResult out;
  out.values.assign(schedule.n_params, 0.0);
  out.value = fom.evaluate_final_state(psi[k_total]);

  StateVector chi;
  Complex coef;
  if (fom.kind == FomKind::StateInfidelity) {
    chi = fom.target_state;
    coef = -2.0 * std::conj(fom.target_state.dot(psi[k_total]));
  } else {
    chi = fom.observable * psi[k_total];
    coef = 2.0;
  }

  ControlInEigenbasis control_eb(control);
  const Complex minus_i(0.0, -1.0);
  for (std::size_t k = k_total; k-- > 0;) {
    const Segment& seg = schedule.segments[k];
    if (seg.fixed) {
      chi = seg.fixed->adjoint() * chi;
      continue;
    }
    const EigenSystem& es = *seg.eigensystem;
    const StateVector chi_eb = es.eigenvectors.adjoint() * chi;
    if (seg.role != SegmentRole::Constant) {
      Complex d;
      if (seg.role == SegmentRole::Duration) {
        const StateVector out_eb = es.eigenvectors.adjoint() * psi[k + 1];
        d = minus_i * (chi_eb.conjugate().cwiseProduct(es.eigenvalues.cast<Complex>())
                           .cwiseProduct(out_eb))
                          .sum();
      } else if (mode == FrechetMode::Exact) {
        const StateVector in_eb = es.eigenvectors.adjoint() * psi[k];
        const OperatorMatrix kernel =
            control_eb.get(es).cwiseProduct(frechet_kernel(es.eigenvalues, seg.duration));
        d = minus_i * seg.duration * chi_eb.dot(kernel * in_eb);
      } else {
        d = minus_i * seg.duration * chi.dot(control * psi[k + 1]);
      }
      out.values[seg.param] += seg.weight * (coef * d).real();
    }
    StateVector rotated = chi_eb;
    for (Eigen::Index a = 0; a < rotated.size(); ++a) {
      const double angle = seg.duration * es.eigenvalues(a);
      rotated(a) *= Complex(std::cos(angle), std::sin(angle));
    }
    chi.noalias() = es.eigenvectors * rotated;
  }
  return out;
}

GradientResult unitary_gradient(const Schedule& schedule, const FigureOfMerit& fom,
                                const OperatorMatrix& control, FrechetMode mode) {
  const std::size_t k_total = schedule.segments.size();
  const Eigen::Index n = schedule.dim;
  std::vector<OperatorMatrix> prefix(k_total + 1);
  prefix[0] = OperatorMatrix::Identity(n, n);
  for (std::size_t k = 0; k < k_total; ++k) {
    prefix[k + 1].noalias() = schedule.segments[k].matrix() * prefix[k];
  }

  const OperatorMatrix& target = fom.target_unitary;
  const Complex g = target.conjugate().cwiseProduct(prefix[k_total]).sum();
  const double nn = static_cast<double>(n) * static_cast<double>(n);

  GradientResult out;
  out.values.assign(schedule.n_params, 0.0);
  out.value = 1.0 - std::norm(g) / nn;

  ControlInEigenbasis control_eb(control);
  const Complex minus_i(0.0, -1.0);
  OperatorMatrix back = target.adjoint();
  OperatorMatrix x(n, n), y(n, n);
  for (std::size_t k = k_total; k-- > 0;) {
    const Segment& seg = schedule.segments[k];
    if (seg.fixed) {
      y.noalias() = back * *seg.fixed;
      back.swap(y);
      continue;
    }
    const EigenSystem& es = *seg.eigensystem;
    const OperatorMatrix& v = es.eigenvectors;
    if (seg.role != SegmentRole::Constant) {
      Complex dg;
      if (seg.role == SegmentRole::Duration) {
        // -i Tr(H P_{k+1} B)
        x.noalias() = prefix[k + 1] * back;
        y.noalias() = x * v;
        Complex acc = 0.0;
        for (Eigen::Index a = 0; a < n; ++a) acc += es.eigenvalues(a) * v.col(a).dot(y.col(a));
        dg = minus_i * acc;
      } else if (mode == FrechetMode::Exact) {
        x.noalias() = prefix[k] * back;
        y.noalias() = x * v;
        x.noalias() = v.adjoint() * y;
        const OperatorMatrix kernel =
            control_eb.get(es).cwiseProduct(frechet_kernel(es.eigenvalues, seg.duration));
        dg = minus_i * seg.duration * kernel.cwiseProduct(x.transpose()).sum();
      } else {
        x.noalias() = prefix[k + 1] * back;
        dg = minus_i * seg.duration * control.cwiseProduct(x.transpose()).sum();
      }
      out.values[seg.param] += seg.weight * (-2.0 / nn) * (std::conj(g) * dg).real();
    }
    // back <- back * U_k
    y.noalias() = back * v;
    for (Eigen::Index a = 0; a < n; ++a) {
      const double angle = -seg.duration * es.eigenvalues(a);
      y.col(a) *= Complex(std::cos(angle), std::sin(angle));
    }
    back.noalias() = y * v.adjoint();
  }
  return out;
}

}  // namespace

GradientResult schedule_gradient(const Schedule& schedule, const FigureOfMerit& fom,
                                 const OperatorMatrix& control, FrechetMode mode) {
  if (schedule.dim != fom.dim()) {
    throw DimensionMismatch("schedule_gradient: schedule and FoM dimensions differ");
  }
  GradientResult out = fom.state_based() ? state_gradient(schedule, fom, control, mode)
                                         : unitary_gradient(schedule, fom, control, mode);
  out.method =
      mode == FrechetMode::Exact ? GradientMethod::AnalyticExact : GradientMethod::AnalyticFirstOrder;
  return out;
}

GradientResult rally_t_gradient(const ControlSystem& sys, const PulseSequence& seq,
                                const FigureOfMerit& fom, const PropagatorCache* cache) {
  if (seq.kind != SequenceKind::RallyT) {
    throw UnsupportedSequence("rally_t_gradient: sequence is not RALLY_T");
  }
  GradientResult out = schedule_gradient(compile(sys, seq, cache), fom, sys.control);
  if (fom.penalty_weight > 0.0) {
    double total = 0.0;
    for (double tau : seq.params) total += tau;
    for (double& g : out.values) g += 2.0 * fom.penalty_weight * total;
    out.value += fom.penalty_weight * total * total;
  }
  return out;
}

GradientResult rally_a_gradient(const ControlSystem& sys, const PulseSequence& seq,
                                const FigureOfMerit& fom) {
  if (seq.kind != SequenceKind::RallyA) {
    throw UnsupportedSequence("rally_a_gradient: sequence is not RALLY_A");
  }
  return schedule_gradient(compile(sys, seq), fom, sys.control);
}

GradientResult grape_gradient(const ControlSystem& sys, std::span<const double> amplitudes,
                              double dt, const FigureOfMerit& fom, FrechetMode mode) {
  const PulseSequence seq =
      PulseSequence::grape(std::vector<double>(amplitudes.begin(), amplitudes.end()), dt);
  return schedule_gradient(compile(sys, seq), fom, sys.control, mode);
}

GradientResult finite_difference(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> params, double h) {
  if (!(h > 0.0)) throw ConstraintViolation("finite_difference: step must be positive");
  GradientResult out;
  out.method = GradientMethod::FiniteDifference;
  std::vector<double> x(params.begin(), params.end());
  out.value = f(x);
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double step = h * std::max(1.0, std::abs(xi));
    x[i] = xi + step;
    const double fp = f(x);
    x[i] = xi - step;
    const double fm = f(x);
    x[i] = xi;
    out.values[i] = (fp - fm) / (2.0 * step);
  }
  return out;
}

}  // namespace rally
