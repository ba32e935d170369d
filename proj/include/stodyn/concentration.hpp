#pragma once

// Core machinery for high-probability analysis of stochastic recursions:
//
//   * unfolding X_t <= H_t X_{t-1} + N_t into a decay product D_t and an
//     adapted minor process M_t with X_t <= D_t (X_{T0} + M_t),
//   * moment profiles (B, mu, sigma^2) for stopped minor processes and the
//     Freedman-style deviation they imply,
//   * threshold sequences, first-crossing stopping times, stopped-process
//     increments, and the improvement / pull-out condition checks that turn
//     a bound on the stopped process into a bound on the raw process.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace stodyn {

enum class ThresholdKind { uniform, linear, inverse_square_scaled };

// Per-step stopping thresholds Lambda_t. `linear` decays as Lambda/t and
// `inverse_square_scaled` as horizon*Lambda/t^2; both treat t=0 as t=1 so a
// trajectory indexed from zero can be scanned uniformly.
struct ThresholdSequence {
  ThresholdKind kind = ThresholdKind::uniform;
  double level = 0.0;
  long horizon = 0;  // used by inverse_square_scaled only

  static ThresholdSequence uniform(double lambda) {
    return {ThresholdKind::uniform, lambda, 0};
  }
  static ThresholdSequence linear(double lambda) {
    return {ThresholdKind::linear, lambda, 0};
  }
  static ThresholdSequence inverse_square_scaled(double lambda, long horizon) {
    return {ThresholdKind::inverse_square_scaled, lambda, horizon};
  }

  double value(long t) const {
    double tt = static_cast<double>(t < 1 ? 1 : t);
    switch (kind) {
      case ThresholdKind::uniform:
        return level;
      case ThresholdKind::linear:
        return level / tt;
      case ThresholdKind::inverse_square_scaled:
        return static_cast<double>(horizon) * level / (tt * tt);
    }
    return level;
  }
};

// Bounds on the stopped minor increments as functions of (t, Lambda_t):
// |increment| <= bounded_diff, conditional mean <= cond_mean, conditional
// variance <= cond_var, valid for t > start_time.
struct MomentProfile {
  std::function<double(long, double)> bounded_diff;
  std::function<double(long, double)> cond_mean;
  std::function<double(long, double)> cond_var;
  long start_time = 0;
};

struct UnfoldedRecursion {
  std::vector<double> dominating;  // D_t = prod_{t'<=t} H_{t'}, index 0 <-> t = 1
  std::vector<double> minor;       // M_t = sum_{t'<=t} N_{t'} / D_{t'}
  double start_value = 0.0;

  // X_t = D_t * (x0 + M_t); must match the directly iterated recursion.
  std::vector<double> reconstruct() const {
    std::vector<double> x(dominating.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = dominating[i] * (start_value + minor[i]);
    return x;
  }
};

inline UnfoldedRecursion unfold_recursion(const std::vector<double>& H,
                                          const std::vector<double>& N, double x0) {
  if (H.size() != N.size())
    throw std::invalid_argument("unfold_recursion: H and N length mismatch");
  UnfoldedRecursion r;
  r.start_value = x0;
  r.dominating.resize(H.size());
  r.minor.resize(H.size());
  double d = 1.0;
  double m = 0.0;
  for (std::size_t i = 0; i < H.size(); ++i) {
    if (!(H[i] > 0.0))
      throw std::invalid_argument("unfold_recursion: H_t must be positive");
    d *= H[i];
    m += N[i] / d;
    r.dominating[i] = d;
    r.minor[i] = m;
  }
  return r;
}

// Freedman-style deviation for a stopped minor process with the given moment
// profile over (T0, T1]:
//
//   Delta = 2 max{ sqrt(sum sigma^2(t, Lambda_t) log(1/delta)),
//                  max_t 2 B(t, Lambda_t) log(1/delta) }
//         + sum mu(t, Lambda_t)
//
// Natural logarithms throughout.
inline double deviation_bound(const MomentProfile& profile,
                              const ThresholdSequence& thresholds, long T0, long T1,
                              double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("deviation_bound: delta must lie in (0,1)");
  if (T0 >= T1) throw std::invalid_argument("deviation_bound: need T0 < T1");
  const double log_term = std::log(1.0 / delta);
  double var_sum = 0.0;
  double max_b = 0.0;
  double mean_sum = 0.0;
  for (long t = T0 + 1; t <= T1; ++t) {
    double lam = thresholds.value(t);
    var_sum += profile.cond_var(t, lam);
    max_b = std::max(max_b, profile.bounded_diff(t, lam));
    mean_sum += profile.cond_mean(t, lam);
  }
  double a = std::sqrt(var_sum * log_term);
  double b = 2.0 * max_b * log_term;
  return 2.0 * std::max(a, b) + mean_sum;
}

struct StoppingRecord {
  std::optional<long> crossing_time;  // first t with X_t > Lambda_t, if any
  ThresholdSequence thresholds;
};

inline StoppingRecord first_crossing(const std::vector<double>& trajectory,
                                     const ThresholdSequence& thresholds) {
  StoppingRecord rec;
  rec.thresholds = thresholds;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    if (trajectory[t] > thresholds.value(static_cast<long>(t))) {
      rec.crossing_time = static_cast<long>(t);
      break;
    }
  }
  return rec;
}

// Increments of the stopped process M_{t ^ tau}: the raw difference while
// tau >= t, exactly zero afterwards.
inline std::vector<double> stopped_increments(const std::vector<double>& M,
                                              const StoppingRecord& tau) {
  if (M.empty()) return {};
  std::vector<double> inc(M.size() - 1, 0.0);
  for (std::size_t t = 1; t < M.size(); ++t) {
    bool alive = !tau.crossing_time || *tau.crossing_time >= static_cast<long>(t);
    inc[t - 1] = alive ? M[t] - M[t - 1] : 0.0;
  }
  return inc;
}

struct ImprovementReport {
  bool improvement_ok = false;  // D_{T1} (A0 + Delta) <= A1
  bool pullout_ok = false;      // D_t (A0 + Delta) <= Lambda for all T0 < t <= T1
  std::optional<long> first_failing_t;
};

inline ImprovementReport check_improvement(const std::function<double(long)>& D_product_at,
                                           double A0, double A1, double Lambda,
                                           double Delta, long T0, long T1) {
  ImprovementReport rep;
  const double level = A0 + Delta;
  rep.improvement_ok = D_product_at(T1) * level <= A1;
  rep.pullout_ok = true;
  for (long t = T0 + 1; t <= T1; ++t) {
    if (D_product_at(t) * level > Lambda) {
      rep.pullout_ok = false;
      rep.first_failing_t = t;
      break;
    }
  }
  return rep;
}

struct PathPair {
  std::vector<double> potential;  // X_t, indexed from the interval start
  std::vector<double> minor;      // M_t, same indexing
};

// Counts trajectories that violate the pull-out implication: some time t
// where the minor process has stayed <= Delta up to t, yet X_t > Lambda_t.
// A correctly instantiated recursion/threshold pair yields zero.
inline long pullout_witness_check(const std::vector<PathPair>& trajectories,
                                  const ThresholdSequence& thresholds, double Delta) {
  long violations = 0;
  for (const auto& path : trajectories) {
    std::size_t n = std::min(path.potential.size(), path.minor.size());
    double running_max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      running_max = std::max(running_max, path.minor[t]);
      if (running_max <= Delta &&
          path.potential[t] > thresholds.value(static_cast<long>(t))) {
        ++violations;
        break;
      }
    }
  }
  return violations;
}

}  // namespace stodyn
