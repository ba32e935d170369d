#pragma once

// Projected SGD on F(w) = (lambda/2) ||w - w*||^2 over a centered ball, with
// a bounded stochastic gradient oracle g = grad F(w) + c * (uniform sphere
// direction). The potential is ||w_t - w*||^2; with rate 1/(lambda t) it
// obeys X_t <= (1 - 2/t) X_{t-1} + N_t pathwise and stays below
// 4 G^2 / lambda^2 almost surely.

#include <cmath>
#include <stdexcept>

#include "stodyn/concentration.hpp"
#include "stodyn/rng.hpp"

namespace stodyn {

enum class Guarantee { last, uniform };

struct SgdConfig {
  std::size_t dim = 5;
  double lambda = 1.0;      // strong convexity
  double grad_bound = 2.0;  // G
  double radius = 1.0;      // feasible ball radius R
  Vector w_star;            // optimum, defaults to the origin
  double noise_radius = 1.0;  // c

  Vector optimum() const { return w_star.empty() ? Vector(dim, 0.0) : w_star; }

  void validate() const {
    if (!(lambda > 0.0 && grad_bound > 0.0 && radius > 0.0 && noise_radius >= 0.0))
      throw std::invalid_argument("SgdConfig: parameters must be positive");
    Vector ws = optimum();
    if (ws.size() != dim) throw std::invalid_argument("SgdConfig: w_star dimension");
    if (norm(ws) > radius + 1e-12)
      throw std::invalid_argument("SgdConfig: optimum outside the domain");
    if (lambda * (radius + norm(ws)) + noise_radius > grad_bound + 1e-12)
      throw std::invalid_argument(
          "SgdConfig: lambda (R + ||w*||) + c must not exceed the gradient bound");
  }

  double potential_cap() const {
    return 4.0 * grad_bound * grad_bound / (lambda * lambda);
  }
};

struct SgdState {
  Vector w;
  long t = 1;  // index of the next step to take
};

inline SgdState sgd_initial_state(const SgdConfig& cfg) {
  // Start on the domain boundary along the first axis.
  SgdState s;
  s.w = Vector(cfg.dim, 0.0);
  s.w[0] = cfg.radius;
  return s;
}

inline Vector oracle_grad(const Vector& w, const SgdConfig& cfg, Rng& rng) {
  Vector g(w.size());
  Vector ws = cfg.optimum();
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = cfg.lambda * (w[i] - ws[i]);
  if (cfg.noise_radius > 0.0) {
    Vector u = rng.unit_sphere(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) g[i] += cfg.noise_radius * u[i];
  }
  return g;
}

inline Vector project_ball(Vector w, double radius) {
  double n = norm(w);
  if (n > radius) {
    double f = radius / n;
    for (auto& c : w) c *= f;
  }
  return w;
}

inline SgdState sgd_step_with_grad(const SgdState& s, const Vector& g,
                                   const SgdConfig& cfg) {
  double eta = 1.0 / (cfg.lambda * static_cast<double>(s.t));
  Vector w = s.w;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * g[i];
  return SgdState{project_ball(std::move(w), cfg.radius), s.t + 1};
}

inline SgdState sgd_step(const SgdState& s, const SgdConfig& cfg, Rng& rng) {
  return sgd_step_with_grad(s, oracle_grad(s.w, cfg, rng), cfg);
}

inline double sgd_potential(const Vector& w, const Vector& w_star) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double d = w[i] - w_star[i];
    s += d * d;
  }
  return s;
}

// N_t = 2 eta_t (lambda X_{t-1} - g^T (w_{t-1} - w*)) + eta_t^2 ||g||^2, the
// one-step residual in X_t <= (1 - 2 eta_t lambda) X_{t-1} + N_t.
inline double sgd_noise_term(const Vector& w_prev, const Vector& g_hat, long t,
                             const SgdConfig& cfg) {
  if (t < 1) throw std::invalid_argument("sgd_noise_term: t >= 1");
  double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
  Vector ws = cfg.optimum();
  double x_prev = sgd_potential(w_prev, ws);
  double align = 0.0;
  for (std::size_t i = 0; i < w_prev.size(); ++i)
    align += g_hat[i] * (w_prev[i] - ws[i]);
  return 2.0 * eta * (cfg.lambda * x_prev - align) + eta * eta * norm_sq(g_hat);
}

// Moment profile for the minor process started at T0 >= 100:
//   B = 20 G^2 t / (lambda^2 T0^2),  mu = 2 G^2 / (lambda^2 T0^2),
//   sigma^2 = (G^2 t^2 / (lambda^2 T0^4)) (80 Lambda + 3 G^2 / (lambda^2 t^2)).
inline MomentProfile sgd_moment_profile(const SgdConfig& cfg, long T0) {
  if (T0 < 100) throw std::domain_error("sgd_moment_profile: requires T0 >= 100");
  double g2 = cfg.grad_bound * cfg.grad_bound;
  double l2 = cfg.lambda * cfg.lambda;
  double t0 = static_cast<double>(T0);
  MomentProfile p;
  p.start_time = T0;
  p.bounded_diff = [g2, l2, t0](long t, double) {
    return 20.0 * g2 * static_cast<double>(t) / (l2 * t0 * t0);
  };
  p.cond_mean = [g2, l2, t0](long, double) { return 2.0 * g2 / (l2 * t0 * t0); };
  p.cond_var = [g2, l2, t0](long t, double lam) {
    double td = static_cast<double>(t);
    return (g2 * td * td / (l2 * t0 * t0 * t0 * t0)) *
           (80.0 * lam + 3.0 * g2 / (l2 * td * td));
  };
  return p;
}

inline double loglog_clamped(long t) {
  double inner = std::log(static_cast<double>(t) + 1.0);
  return std::log(std::max(inner, 1.0));
}

// Convergence rate values: 1000 G^2 log(1/delta) / (lambda^2 t) for the last
// iterate, with an extra 2 loglog(t+1) term for the uniform guarantee.
inline double sgd_bound(long t, double delta, Guarantee g, const SgdConfig& cfg) {
  if (t < 1) throw std::invalid_argument("sgd_bound: t >= 1");
  double base = 1000.0 * cfg.grad_bound * cfg.grad_bound /
                (cfg.lambda * cfg.lambda * static_cast<double>(t));
  double lg = std::log(1.0 / delta);
  if (g == Guarantee::uniform) lg += 2.0 * loglog_clamped(t);
  return base * lg;
}

// prod_{t'=T0+1}^{t} (1 - 2/t') = T0 (T0 - 1) / (t (t - 1)).
inline double product_decay(long T0, long t) {
  if (!(2 <= T0 && T0 < t)) throw std::invalid_argument("product_decay: need 2 <= T0 < t");
  double a = static_cast<double>(T0);
  double b = static_cast<double>(t);
  return a * (a - 1.0) / (b * (b - 1.0));
}

}  // namespace stodyn
