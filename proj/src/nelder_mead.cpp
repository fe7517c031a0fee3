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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "optimizer_support.hpp"
#include "rally/errors.hpp"
#include "rally/optimizers.hpp"

namespace rally {

const char* to_string(OptimizerMethod method) {
  return method == OptimizerMethod::AdaptiveNelderMead ? "nelder_mead" : "quasi_newton";
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Tolerance:
      return "tolerance";
    case StopReason::MaxEvals:
      return "max_evals";
    case StopReason::TargetReached:
      return "target_reached";
    case StopReason::LineSearchFailure:
      return "line_search_failure";
    case StopReason::TimeBudget:
      return "time_budget";
  }
  return "unknown";
}

OptimizerMethod optimizer_method_from_string(const std::string& name) {
  if (name == "nelder_mead") return OptimizerMethod::AdaptiveNelderMead;
  if (name == "quasi_newton" || name == "lbfgsb") return OptimizerMethod::BoundedQuasiNewton;
  throw ConfigError("unknown optimizer '" + name + "'");
}

void OptimizerConfig::validate(std::size_t n_params) const {
  if (!(xatol > 0.0) || !(fatol > 0.0)) throw ConfigError("optimizer: xatol and fatol must be > 0");
  if (max_fom_evals < 1) throw ConfigError("optimizer: max_fom_evals must be >= 1");
  if (lower.size() != upper.size()) throw ConfigError("optimizer: bound vectors differ in length");
  if (!lower.empty()) {
    if (lower.size() != n_params) {
      throw ConfigError("optimizer: " + std::to_string(lower.size()) + " bounds for " +
                        std::to_string(n_params) + " parameters");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i])) throw ConfigError("optimizer: lower bound exceeds upper bound");
    }
  }
  if (history < 1) throw ConfigError("optimizer: history must be >= 1");
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw ConfigError("optimizer: need 0 < wolfe_c1 < wolfe_c2 < 1");
  }
}

namespace {

void check_start(std::span<const double> x0, const OptimizerConfig& config) {
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (!std::isfinite(x0[i])) throw InvalidStart("start point has a non-finite entry");
    if (config.bounded() && (x0[i] < config.lower[i] || x0[i] > config.upper[i])) {
      throw InvalidStart("start point violates bounds at coordinate " + std::to_string(i));
    }
  }
}

}  // namespace

OptimizationRun nelder_mead(const Objective& objective, std::span<const double> x0,
                            const OptimizerConfig& config) {
  const std::size_t n = x0.size();
  config.validate(n);
  check_start(x0, config);
  if (n == 0) throw InvalidStart("nelder_mead: empty parameter vector");

  const double dim = static_cast<double>(n);
  const double rho = 1.0;
  const double chi = 1.0 + 2.0 / dim;
  const double psi = 0.75 - 1.0 / (2.0 * dim);
  const double sigma = 1.0 - 1.0 / dim;

  detail::EvaluationBook book(config, n);
  auto eval = [&](std::vector<double>& x) {
    detail::clamp_to_box(x, config);
    book.reserve();
    const double f = objective(x);
    book.record(x, f);
    return f;
  };

  std::vector<std::vector<double>> sim(n + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> fsim(n + 1);
  long iterations = 0;
  try {
    fsim[0] = eval(sim[0]);
    for (std::size_t i = 0; i < n; ++i) {
      double step = config.initial_step.value_or(
          config.bounded() ? 0.05 * (config.upper[i] - config.lower[i]) : 0.05);
      if (step == 0.0) step = 0.05;
      std::vector<double>& v = sim[i + 1];
      if (config.bounded() && v[i] + step > config.upper[i]) step = -step;
      v[i] += step;
      fsim[i + 1] = eval(v);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> xbar(n), xr(n), xe(n), xc(n);
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fsim[a] < fsim[b]; });
      {
        std::vector<std::vector<double>> s2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
          s2[i] = std::move(sim[order[i]]);
          f2[i] = fsim[order[i]];
        }
        sim.swap(s2);
        fsim.swap(f2);
      }

      double xspread = 0.0, fspread = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        fspread = std::max(fspread, std::abs(fsim[i] - fsim[0]));
        for (std::size_t j = 0; j < n; ++j) {
          xspread = std::max(xspread, std::abs(sim[i][j] - sim[0][j]));
        }
      }
      if (xspread <= config.xatol && fspread <= config.fatol) {
        return book.finish(StopReason::Tolerance, iterations);
      }
      ++iterations;

      std::fill(xbar.begin(), xbar.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) xbar[j] += sim[i][j];
      }
      for (double& v : xbar) v /= dim;
      const std::vector<double>& worst = sim[n];

      for (std::size_t j = 0; j < n; ++j) xr[j] = xbar[j] + rho * (xbar[j] - worst[j]);
      const double fr = eval(xr);
      bool shrink = false;
      if (fr < fsim[0]) {
        for (std::size_t j = 0; j < n; ++j) xe[j] = xbar[j] + rho * chi * (xbar[j] - worst[j]);
        const double fe = eval(xe);
        if (fe < fr) {
          sim[n] = xe;
          fsim[n] = fe;
        } else {
          sim[n] = xr;
          fsim[n] = fr;
        }
      } else if (fr < fsim[n - 1]) {
        sim[n] = xr;
        fsim[n] = fr;
      } else if (fr < fsim[n]) {
        for (std::size_t j = 0; j < n; ++j) xc[j] = xbar[j] + psi * rho * (xbar[j] - worst[j]);
        const double fc = eval(xc);
        if (fc <= fr) {
          sim[n] = xc;
          fsim[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        for (std::size_t j = 0; j < n; ++j) xc[j] = xbar[j] - psi * (xbar[j] - worst[j]);
        const double fcc = eval(xc);
        if (fcc < fsim[n]) {
          sim[n] = xc;
          fsim[n] = fcc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            sim[i][j] = sim[0][j] + sigma * (sim[i][j] - sim[0][j]);
          }
          fsim[i] = eval(sim[i]);
        }
      }
    }
  } catch (const detail::StopSignal& stop) {
    return book.finish(stop.reason, iterations);
  }
}

}  // namespace rally
