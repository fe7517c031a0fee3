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

// Limited-memory BFGS restricted to the free variables of a box, with a
// strong-Wolfe line search truncated at the first bound the step reaches.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "optimizer_support.hpp"
#include "rally/errors.hpp"
#include "rally/optimizers.hpp"

namespace rally {
namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot_free(const Vec& a, const Vec& b, const std::vector<char>& free) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (free[i]) s += a[i] * b[i];
  }
  return s;
}

double inf_norm(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Point {
  Vec x;
  Vec g;
  double f = 0.0;
};

class Solver {
 public:
  Solver(const ValueAndGradient& objective, const OptimizerConfig& config, std::size_t n)
      : objective_(objective), config_(config), n_(n), book_(config, n) {}

  OptimizationRun run(std::span<const double> x0) {
    long iterations = 0;
    try {
      Point cur = evaluate(Vec(x0.begin(), x0.end()));
      bool retried = false;
      while (true) {
        const Vec pg = projected_gradient(cur);
        if (inf_norm(pg) <= config_.pgtol) return book_.finish(StopReason::Tolerance, iterations);

        std::vector<char> free(n_);
        for (std::size_t i = 0; i < n_; ++i) free[i] = pg[i] != 0.0 || !at_bound(cur.x, i);

        Vec d = direction(cur, free);
        double slope = dot(cur.g, d);
        if (!(slope < 0.0)) {
          history_.clear();
          d = pg;
          for (double& v : d) v = -v;
          slope = dot(cur.g, d);
        }
        const double alpha0 = history_.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(d, d))) : 1.0;

        Point next;
        if (!line_search(cur, d, slope, alpha0, next)) {
          if (!history_.empty() && !retried) {
            history_.clear();
            retried = true;
            continue;
          }
          return book_.finish(StopReason::LineSearchFailure, iterations);
        }
        retried = false;
        ++iterations;

        Vec s(n_), y(n_);
        for (std::size_t i = 0; i < n_; ++i) {
          s[i] = next.x[i] - cur.x[i];
          y[i] = next.g[i] - cur.g[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(y, y) * dot(s, s))) {
          history_.push_back({s, y});
          if (static_cast<int>(history_.size()) > config_.history) history_.pop_front();
        }
        const double df = std::abs(cur.f - next.f);
        cur = std::move(next);
        if (df < config_.fatol && inf_norm(s) < config_.xatol) {
          return book_.finish(StopReason::Tolerance, iterations);
        }
      }
    } catch (const detail::StopSignal& stop) {
      return book_.finish(stop.reason, iterations);
    }
  }

 private:
  struct Pair {
    Vec s;
    Vec y;
  };

  Point evaluate(Vec x) {
    detail::clamp_to_box(x, config_);
    book_.reserve();
    Point p;
    p.g.assign(n_, 0.0);
    p.f = objective_(x, p.g);
    p.x = std::move(x);
    book_.record(p.x, p.f);
    return p;
  }

  // Coordinates within roundoff of a bound count as active; otherwise a
  // residual like 1e-20 caps every later step length at the same size.
  static double snap_tolerance(double bound) { return 1e-12 * std::max(1.0, std::abs(bound)); }

  bool at_lower(const Vec& x, std::size_t i) const {
    return config_.bounded() && x[i] <= config_.lower[i] + snap_tolerance(config_.lower[i]);
  }
  bool at_upper(const Vec& x, std::size_t i) const {
    return config_.bounded() && x[i] >= config_.upper[i] - snap_tolerance(config_.upper[i]);
  }
  bool at_bound(const Vec& x, std::size_t i) const { return at_lower(x, i) || at_upper(x, i); }

  Vec projected_gradient(const Point& p) const {
    Vec pg = p.g;
    for (std::size_t i = 0; i < n_; ++i) {
      if ((at_lower(p.x, i) && pg[i] > 0.0) || (at_upper(p.x, i) && pg[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
  }

  Vec direction(const Point& p, const std::vector<char>& free) const {
    Vec q(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) q[i] = free[i] ? p.g[i] : 0.0;
    std::vector<double> alpha(history_.size()), rho(history_.size());
    for (std::size_t k = history_.size(); k-- > 0;) {
      const Pair& h = history_[k];
      const double sy = dot_free(h.s, h.y, free);
      rho[k] = sy > 0.0 ? 1.0 / sy : 0.0;
      alpha[k] = rho[k] * dot_free(h.s, q, free);
      for (std::size_t i = 0; i < n_; ++i) {
        if (free[i]) q[i] -= alpha[k] * h.y[i];
      }
    }
    double gamma = 1.0;
    if (!history_.empty()) {
      const Pair& h = history_.back();
      const double yy = dot_free(h.y, h.y, free);
      const double sy = dot_free(h.s, h.y, free);
      if (yy > 0.0 && sy > 0.0) gamma = sy / yy;
    }
    for (double& v : q) v *= gamma;
    for (std::size_t k = 0; k < history_.size(); ++k) {
      const Pair& h = history_[k];
      const double beta = rho[k] * dot_free(h.y, q, free);
      for (std::size_t i = 0; i < n_; ++i) {
        if (free[i]) q[i] += h.s[i] * (alpha[k] - beta);
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      double d = free[i] ? -q[i] : 0.0;
      if ((at_lower(p.x, i) && d < 0.0) || (at_upper(p.x, i) && d > 0.0)) d = 0.0;
      q[i] = d;
    }
    return q;
  }

  double max_step(const Vec& x, const Vec& d) const {
    double amax = std::numeric_limits<double>::infinity();
    if (!config_.bounded()) return amax;
    for (std::size_t i = 0; i < n_; ++i) {
      if (d[i] > 0.0) amax = std::min(amax, (config_.upper[i] - x[i]) / d[i]);
      if (d[i] < 0.0) amax = std::min(amax, (config_.lower[i] - x[i]) / d[i]);
    }
    return amax;
  }

  Point trial(const Point& base, const Vec& d, double alpha) {
    Vec x(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      x[i] = base.x[i] + alpha * d[i];
      if (!config_.bounded()) continue;
      if (d[i] < 0.0 && x[i] <= config_.lower[i] + snap_tolerance(config_.lower[i])) {
        x[i] = config_.lower[i];
      } else if (d[i] > 0.0 && x[i] >= config_.upper[i] - snap_tolerance(config_.upper[i])) {
        x[i] = config_.upper[i];
      }
    }
    return evaluate(std::move(x));
  }

  // Cubic interpolation between two bracketing points, safeguarded to the
  // interior of the bracket; falls back to bisection.
  static double interpolate(double a, double fa, double da, double b, double fb, double db) {
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double margin = 0.1 * (hi - lo);
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    double t = 0.5 * (a + b);
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), b - a);
      const double denom = db - da + 2.0 * d2;
      if (denom != 0.0) {
        const double c = b - (b - a) * (db + d2 - d1) / denom;
        if (std::isfinite(c) && c >= lo + margin && c <= hi - margin) t = c;
      }
    }
    return t;
  }

  bool line_search(const Point& base, const Vec& d, double slope, double alpha0, Point& out) {
    const double amax = max_step(base.x, d);
    if (!(amax > 0.0)) return false;
    const double c1 = config_.wolfe_c1, c2 = config_.wolfe_c2;
    const int budget = config_.max_line_search_evals;
    int used = 0;

    auto armijo = [&](const Point& p, double a) { return p.f <= base.f + c1 * a * slope; };
    auto curvature_ok = [&](double dphi) { return std::abs(dphi) <= -c2 * slope; };

    double a_prev = 0.0, f_prev = base.f, d_prev = slope;
    Point p_prev = base;
    double a = std::min(alpha0, amax);
    bool have_lo = false;
    double a_lo = 0, f_lo = 0, d_lo = 0, a_hi = 0, f_hi = 0, d_hi = 0;
    Point p_lo;

    while (true) {
      if (used++ >= budget) return false;
      Point p = trial(base, d, a);
      const double dphi = dot(p.g, d);
      if (!armijo(p, a) || (a_prev > 0.0 && p.f >= f_prev)) {
        a_lo = a_prev, f_lo = f_prev, d_lo = d_prev, p_lo = std::move(p_prev);
        a_hi = a, f_hi = p.f, d_hi = dphi;
        have_lo = true;
        break;
      }
      if (curvature_ok(dphi) || a >= amax) {
        out = std::move(p);
        return true;
      }
      if (dphi >= 0.0) {
        a_lo = a, f_lo = p.f, d_lo = dphi, p_lo = std::move(p);
        a_hi = a_prev, f_hi = f_prev, d_hi = d_prev;
        have_lo = true;
        break;
      }
      a_prev = a, f_prev = p.f, d_prev = dphi, p_prev = std::move(p);
      a = std::min(2.0 * a, amax);
    }

    // zoom
    while (have_lo) {
      if (used++ >= budget || std::abs(a_hi - a_lo) <= 1e-16 * std::max(1.0, a_lo)) break;
      const double a_j = interpolate(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi);
      Point p = trial(base, d, a_j);
      const double dphi = dot(p.g, d);
      if (!armijo(p, a_j) || p.f >= f_lo) {
        a_hi = a_j, f_hi = p.f, d_hi = dphi;
      } else {
        if (curvature_ok(dphi)) {
          out = std::move(p);
          return true;
        }
        if (dphi * (a_hi - a_lo) >= 0.0) {
          a_hi = a_lo, f_hi = f_lo, d_hi = d_lo;
        }
        a_lo = a_j, f_lo = p.f, d_lo = dphi, p_lo = std::move(p);
      }
    }
    // Budget exhausted: accept the best sufficient-decrease point if any.
    if (a_lo > 0.0 && f_lo < base.f) {
      out = std::move(p_lo);
      return true;
    }
    return false;
  }

  const ValueAndGradient& objective_;
  const OptimizerConfig& config_;
  std::size_t n_;
  detail::EvaluationBook book_;
  std::deque<Pair> history_;
};

}  // namespace

OptimizationRun quasi_newton(const ValueAndGradient& objective, std::span<const double> x0,
                             const OptimizerConfig& config) {
  config.validate(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (!std::isfinite(x0[i])) throw InvalidStart("start point has a non-finite entry");
    if (config.bounded() && (x0[i] < config.lower[i] || x0[i] > config.upper[i])) {
      throw InvalidStart("start point violates bounds at coordinate " + std::to_string(i));
    }
  }
  if (x0.empty()) throw InvalidStart("quasi_newton: empty parameter vector");
  Solver solver(objective, config, x0.size());
  return solver.run(x0);
}

}  // namespace rally
