#pragma once

// Stochastic linear bandit with incremental least-squares updates: the agent
// scores finite action sets by <x, theta> + sqrt(beta) ||x||_{V^-1}, observes
// y = <theta*, x> + eps with |eps| <= 1, and updates
//   theta <- theta + eta V^{-1} (y - <theta, x>) x,   V <- V + eta x x^T.
// The running inverse is maintained by rank-one updates and re-verified
// against a direct solve every 512 steps. The tracked potential is
// ||theta_t - theta*||^2_{V_t}.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stodyn/matrix.hpp"
#include "stodyn/rng.hpp"

namespace stodyn {

struct BanditConfig {
  std::size_t dim = 4;
  double lambda = 1.0;       // regularizer, V_0 = lambda I
  double action_bound = 1.0; // L: decision sets live in ball(L)
  double param_bound = 1.0;  // L*: ||theta*|| <= L*
  long horizon = 10000;      // T
  double delta = 0.1;
  int actions_per_round = 20;  // K
  Vector theta_star;           // defaults to L* e_1

  double eta() const { return lambda / (action_bound * action_bound); }

  Vector truth() const {
    if (!theta_star.empty()) return theta_star;
    Vector t(dim, 0.0);
    t[0] = param_bound;
    return t;
  }

  void validate() const {
    if (!(lambda > 0.0 && action_bound > 0.0 && param_bound > 0.0))
      throw std::invalid_argument("BanditConfig: parameters must be positive");
    if (horizon < 1 || actions_per_round < 2)
      throw std::invalid_argument("BanditConfig: need horizon >= 1 and K >= 2");
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("BanditConfig: delta must lie in (0,1)");
    Vector t = truth();
    if (t.size() != dim || norm(t) > param_bound + 1e-12)
      throw std::invalid_argument("BanditConfig: invalid theta*");
  }
};

// beta = 288 max{ L*^2 lambda, (d lambda / L^2) log(1 + T/d) log(1/delta) }.
inline double beta_t(const BanditConfig& cfg) {
  double a = cfg.param_bound * cfg.param_bound * cfg.lambda;
  double b = static_cast<double>(cfg.dim) * cfg.lambda /
             (cfg.action_bound * cfg.action_bound) *
             std::log(1.0 + static_cast<double>(cfg.horizon) / static_cast<double>(cfg.dim)) *
             std::log(1.0 / cfg.delta);
  return 288.0 * std::max(a, b);
}

struct BanditBounds {
  double potential_threshold = 0.0;
  double regret_bound = 0.0;
};

inline BanditBounds bandit_bounds(const BanditConfig& cfg) {
  BanditBounds out;
  out.potential_threshold = beta_t(cfg);
  double log_term = std::log(1.0 + static_cast<double>(cfg.horizon) /
                                       static_cast<double>(cfg.dim));
  double inner = std::max(cfg.param_bound * cfg.param_bound * cfg.action_bound *
                              cfg.action_bound,
                          static_cast<double>(cfg.dim) * log_term *
                              std::log(1.0 / cfg.delta));
  out.regret_bound = 34.0 * std::sqrt(2.0 * static_cast<double>(cfg.dim) *
                                      static_cast<double>(cfg.horizon) * inner *
                                      log_term);
  return out;
}

struct BanditState {
  Vector theta;
  Matrix V;
  Matrix Vinv;
  long t = 0;
  double cumulative_regret = 0.0;
  std::vector<double> potential_history;  // X_0, X_1, ...
  std::vector<double> quad_form_history;  // eta ||x_i||^2_{V_{i-1}^{-1}}, i = 1..t
};

inline double bandit_potential(const BanditState& s, const BanditConfig& cfg) {
  Vector diff = s.theta;
  Vector truth = cfg.truth();
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= truth[i];
  return weighted_norm_sq(diff, s.V);
}

inline BanditState bandit_initial_state(const BanditConfig& cfg) {
  BanditState s;
  s.theta = Vector(cfg.dim, 0.0);
  s.V = Matrix::identity(cfg.dim);
  s.Vinv = Matrix::identity(cfg.dim);
  for (std::size_t i = 0; i < cfg.dim; ++i) {
    s.V(i, i) = cfg.lambda;
    s.Vinv(i, i) = 1.0 / cfg.lambda;
  }
  s.potential_history.push_back(bandit_potential(s, cfg));
  return s;
}

inline std::vector<Vector> gen_decision_set(const BanditConfig& cfg, Rng& rng) {
  std::vector<Vector> set;
  set.reserve(cfg.actions_per_round);
  for (int i = 0; i < cfg.actions_per_round; ++i)
    set.push_back(rng.ball(cfg.dim, cfg.action_bound));
  return set;
}

// argmax over the set of <x, theta> + sqrt(beta) ||x||_{V^-1}; ties go to the
// earliest action.
inline const Vector& select_action(const BanditState& s, double beta,
                                   const std::vector<Vector>& decision_set) {
  if (decision_set.empty())
    throw std::invalid_argument("select_action: empty decision set");
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  double root_beta = std::sqrt(beta);
  for (std::size_t i = 0; i < decision_set.size(); ++i) {
    const Vector& x = decision_set[i];
    double score = dot(x, s.theta) + root_beta * std::sqrt(weighted_norm_sq(x, s.Vinv));
    if (score > best) {
      best = score;
      best_i = i;
    }
  }
  return decision_set[best_i];
}

struct BanditStepInfo {
  double epsilon = 0.0;
  double reward = 0.0;
  double quad_form = 0.0;  // ||x||^2_{V_{t-1}^{-1}} before the update
};

inline BanditStepInfo bandit_step(BanditState& s, const Vector& x,
                                  const BanditConfig& cfg, Rng& rng) {
  if (norm(x) > cfg.action_bound + 1e-12)
    throw std::invalid_argument("bandit_step: action outside ball(L)");
  const double eta = cfg.eta();
  BanditStepInfo info;
  info.quad_form = weighted_norm_sq(x, s.Vinv);
  info.epsilon = rng.uniform(-1.0, 1.0);
  info.reward = dot(cfg.truth(), x) + info.epsilon;

  double residual = info.reward - dot(s.theta, x);
  Vector vinv_x = matvec(s.Vinv, x);
  for (std::size_t i = 0; i < s.theta.size(); ++i)
    s.theta[i] += eta * residual * vinv_x[i];

  for (std::size_t i = 0; i < cfg.dim; ++i)
    for (std::size_t j = 0; j < cfg.dim; ++j) s.V(i, j) += eta * x[i] * x[j];
  s.Vinv = sherman_morrison(s.Vinv, x, x, eta);
  s.t += 1;
  s.quad_form_history.push_back(eta * info.quad_form);
  s.potential_history.push_back(bandit_potential(s, cfg));

  if (s.t % 512 == 0) {
    // Rank-one drift control: compare against a direct solve, then adopt it.
    Matrix direct = solve_small(s.V, Matrix::identity(cfg.dim));
    Matrix prod = multiply(s.V, s.Vinv);
    for (std::size_t i = 0; i < cfg.dim; ++i)
      for (std::size_t j = 0; j < cfg.dim; ++j) {
        double want = i == j ? 1.0 : 0.0;
        if (std::abs(prod(i, j) - want) > 1e-8)
          throw std::logic_error("bandit_step: inverse maintenance drifted");
      }
    s.Vinv = std::move(direct);
  }
  return info;
}

struct EllipticalSandwich {
  double lhs = 0.0;   // log det(V_t) / det(V_0)
  double mid = 0.0;   // sum of eta ||x_i||^2_{V_{i-1}^{-1}}
  double rhs1 = 0.0;  // 2 log det ratio
  double rhs2 = 0.0;  // 2 d log(1 + eta t L^2 / (d lambda))
};

inline EllipticalSandwich elliptical_sandwich(const BanditState& s,
                                              const BanditConfig& cfg) {
  EllipticalSandwich e;
  for (double q : s.quad_form_history) {
    e.lhs += std::log1p(q);
    e.mid += q;
  }
  e.rhs1 = 2.0 * e.lhs;
  e.rhs2 = 2.0 * static_cast<double>(cfg.dim) *
           std::log(1.0 + cfg.eta() * static_cast<double>(s.t) * cfg.action_bound *
                              cfg.action_bound /
                              (static_cast<double>(cfg.dim) * cfg.lambda));
  return e;
}

// Delta = sqrt(144 eta d log(1 + eta T1 L^2/(d lambda)) Lambda log(1/delta'))
//       + 16 eta d log(1 + eta T1 L^2/(d lambda)) sqrt(log(1/delta')).
inline double bandit_deviation(const BanditConfig& cfg, long T1, double Lambda,
                               double delta_p) {
  if (T1 < 1) throw std::invalid_argument("bandit_deviation: T1 >= 1");
  if (!(Lambda >= 0.0)) throw std::invalid_argument("bandit_deviation: Lambda >= 0");
  if (!(delta_p > 0.0 && delta_p < 1.0))
    throw std::invalid_argument("bandit_deviation: delta' must lie in (0,1)");
  double eta = cfg.eta();
  double d = static_cast<double>(cfg.dim);
  double log_det = std::log(1.0 + eta * static_cast<double>(T1) * cfg.action_bound *
                                      cfg.action_bound / (d * cfg.lambda));
  double L = std::log(1.0 / delta_p);
  return std::sqrt(144.0 * eta * d * log_det * Lambda * L) +
         16.0 * eta * d * log_det * std::sqrt(L);
}

// Instantaneous regret <x* - x_chosen, theta*> against the best action in
// the presented set.
inline double regret_accounting(const std::vector<Vector>& decision_set,
                                const Vector& theta_star, const Vector& x_chosen) {
  if (decision_set.empty())
    throw std::invalid_argument("regret_accounting: empty decision set");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : decision_set) best = std::max(best, dot(x, theta_star));
  return best - dot(x_chosen, theta_star);
}

}  // namespace stodyn
