// Copyright 2026 The streamap Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STREAMAP_OPTIMIZER_HPP_
#define STREAMAP_OPTIMIZER_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "streamap/error.hpp"
#include "streamap/random.hpp"

namespace streamap::optim {

using ParamVector = std::vector<double>;
using GradFn = std::function<ParamVector(const ParamVector&)>;

namespace detail {
inline void require_same_length(const ParamVector& a, const ParamVector& b, const char* op) {
  require(a.size() == b.size(), ErrorKind::kInvalidArgument,
          std::string(op) + ": parameter and gradient lengths differ");
}
inline void require_finite(const ParamVector& g) {
  for (double v : g) {
    require(std::isfinite(v), ErrorKind::kInvalidArgument, "non-finite gradient");
  }
}
}  // namespace detail

inline ParamVector sgd_step(ParamVector theta, const ParamVector& grad, double lr) {
  detail::require_same_length(theta, grad, "sgd_step");
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
  return theta;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamVector m;
  ParamVector v;
  std::int64_t t = 0;
};

// Bias-corrected Adam. Moments are lazily sized on the first call.
inline ParamVector adam_step(AdamState& s, ParamVector theta, const ParamVector& grad,
                             const AdamConfig& cfg) {
  detail::require_same_length(theta, grad, "adam_step");
  if (s.m.empty()) {
    s.m.assign(theta.size(), 0.0);
    s.v.assign(theta.size(), 0.0);
  }
  require(s.m.size() == theta.size(), ErrorKind::kInvalidArgument,
          "adam_step: state was built for a different parameter length");
  ++s.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * grad[i];
    s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    theta[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
  return theta;
}

struct Sgd {
  double lr = 0.1;
  ParamVector step(const ParamVector& theta, const ParamVector& grad) const {
    return sgd_step(theta, grad, lr);
  }
};

struct Adam {
  AdamConfig config;
  AdamState state;
  ParamVector step(const ParamVector& theta, const ParamVector& grad) {
    return adam_step(state, theta, grad, config);
  }
};

using InnerOptimizer = std::variant<Sgd, Adam>;

inline ParamVector inner_step(InnerOptimizer& opt, const ParamVector& theta,
                              const ParamVector& grad) {
  return std::visit([&](auto& o) { return o.step(theta, grad); }, opt);
}

struct LookaheadConfig {
  int k = 5;
  double alpha = 0.5;

  void validate() const {
    require(k >= 1, ErrorKind::kInvalidArgument, "lookahead: k must be >= 1");
    require(alpha > 0.0 && alpha <= 1.0, ErrorKind::kInvalidArgument,
            "lookahead: alpha must lie in (0, 1]");
  }
};

// Slow weights phi, fast weights theta. Each sync resets theta to phi, takes
// k inner steps, then moves phi a fraction alpha toward theta. Inner
// optimizer state carries over between syncs.
inline ParamVector lookahead_run(
    ParamVector phi, InnerOptimizer& inner, const LookaheadConfig& cfg, const GradFn& grad_fn,
    std::int64_t sync_count,
    const std::function<void(std::int64_t, const ParamVector&)>& on_sync = {}) {
  cfg.validate();
  for (std::int64_t s = 0; s < sync_count; ++s) {
    ParamVector theta = phi;
    for (int i = 0; i < cfg.k; ++i) {
      ParamVector g = grad_fn(theta);
      detail::require_finite(g);
      theta = inner_step(inner, theta, g);
    }
    for (std::size_t j = 0; j < phi.size(); ++j) phi[j] += cfg.alpha * (theta[j] - phi[j]);
    if (on_sync) on_sync(s, phi);
  }
  return phi;
}

enum class Objective { kQuadratic, kRosenbrock };

inline double objective_value(Objective o, const ParamVector& x) {
  if (o == Objective::kQuadratic) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  }
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  return a * a + 100.0 * b * b;
}

inline ParamVector objective_gradient(Objective o, const ParamVector& x) {
  if (o == Objective::kQuadratic) {
    ParamVector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
    return g;
  }
  const double b = x[1] - x[0] * x[0];
  return {-2.0 * (1.0 - x[0]) - 400.0 * x[0] * b, 200.0 * b};
}

enum class OptimizerKind { kSgd, kAdam, kLookaheadSgd, kLookaheadAdam };

struct BenchmarkSpec {
  Objective objective = Objective::kQuadratic;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double lr = 0.1;
  AdamConfig adam;  // lr taken from `lr`
  LookaheadConfig lookahead;
  std::int64_t steps = 100;  // inner steps
  std::uint64_t seed = 0;
  bool random_init = false;  // otherwise 1.0 (quadratic) or (-1.2, 1) (rosenbrock)
  int dimension = 1;         // quadratic only
};

struct BenchmarkResult {
  std::vector<std::pair<std::int64_t, double>> trajectory;  // (inner step, loss)
  ParamVector final_params;
  double final_loss = 0.0;
  bool diverged = false;
};

inline ParamVector benchmark_start(const BenchmarkSpec& spec) {
  const std::size_t n =
      spec.objective == Objective::kRosenbrock ? 2 : static_cast<std::size_t>(spec.dimension);
  ParamVector x;
  if (spec.random_init) {
    for (std::size_t i = 0; i < n; ++i) x.push_back(4.0 * counter_uniform(spec.seed, i) - 2.0);
  } else if (spec.objective == Objective::kRosenbrock) {
    x = {-1.2, 1.0};
  } else {
    x.assign(n, 1.0);
  }
  return x;
}

// Deterministic optimizer run. Plain optimizers log every step; Lookahead
// logs the slow weights after every sync (steps / k syncs). Divergence ends
// the run and is reported, not thrown.
inline BenchmarkResult benchmark(const BenchmarkSpec& spec) {
  require(spec.steps >= 0, ErrorKind::kInvalidArgument, "benchmark: negative step count");
  require(spec.lr > 0.0, ErrorKind::kInvalidArgument, "benchmark: lr must be positive");
  require(spec.objective == Objective::kRosenbrock || spec.dimension >= 1,
          ErrorKind::kInvalidArgument, "benchmark: dimension must be >= 1");
  BenchmarkResult r;
  ParamVector x = benchmark_start(spec);
  auto loss = [&](const ParamVector& p) { return objective_value(spec.objective, p); };
  r.trajectory.emplace_back(0, loss(x));

  AdamConfig adam = spec.adam;
  adam.lr = spec.lr;
  const bool use_adam =
      spec.optimizer == OptimizerKind::kAdam || spec.optimizer == OptimizerKind::kLookaheadAdam;
  InnerOptimizer inner = use_adam ? InnerOptimizer{Adam{adam, {}}} : InnerOptimizer{Sgd{spec.lr}};
  GradFn grad = [&](const ParamVector& p) { return objective_gradient(spec.objective, p); };

  try {
    if (spec.optimizer == OptimizerKind::kLookaheadSgd ||
        spec.optimizer == OptimizerKind::kLookaheadAdam) {
      spec.lookahead.validate();
      const std::int64_t syncs = spec.steps / spec.lookahead.k;
      x = lookahead_run(x, inner, spec.lookahead, grad, syncs,
                        [&](std::int64_t s, const ParamVector& phi) {
                          const double l = loss(phi);
                          r.trajectory.emplace_back((s + 1) * spec.lookahead.k, l);
                          if (!std::isfinite(l)) {
                            fail(ErrorKind::kInternal, "diverged");
                          }
                        });
    } else {
      for (std::int64_t s = 0; s < spec.steps; ++s) {
        ParamVector g = grad(x);
        detail::require_finite(g);
        x = inner_step(inner, x, g);
        const double l = loss(x);
        r.trajectory.emplace_back(s + 1, l);
        if (!std::isfinite(l)) fail(ErrorKind::kInternal, "diverged");
      }
    }
  } catch (const Error&) {
    r.diverged = true;
  }
  r.final_params = x;
  r.final_loss = r.trajectory.back().second;
  return r;
}

}  // namespace streamap::optim

#endif  // STREAMAP_OPTIMIZER_HPP_
