#pragma once

// Seeded Monte Carlo experiment runner. Each trial draws its random stream
// from (base_seed, trial_index) through a 64-bit mix, simulates one
// trajectory of the selected dynamic, and tests it against the matching
// tail threshold. Aggregation is a deterministic fold in trial-index order,
// so serial and threaded execution produce identical reports.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stodyn/bandit.hpp"
#include "stodyn/concentration.hpp"
#include "stodyn/csv.hpp"
#include "stodyn/pca.hpp"
#include "stodyn/rng.hpp"
#include "stodyn/schedule.hpp"
#include "stodyn/sgd.hpp"
#include "stodyn/stats.hpp"
#include "stodyn/toy.hpp"

namespace stodyn {

enum class Dynamic { toy, sgd, pca, bandit };

inline std::vector<long> default_checkpoints(long horizon) {
  std::vector<long> out;
  for (long t = 1; t <= std::min<long>(10, horizon); ++t) out.push_back(t);
  for (int k = 8;; ++k) {
    long t = static_cast<long>(std::ceil(std::pow(10.0, static_cast<double>(k) / 8.0)));
    if (t > horizon) break;
    if (t > out.back()) out.push_back(t);
  }
  return out;
}

struct ExperimentSpec {
  Dynamic dynamic = Dynamic::toy;
  Guarantee guarantee = Guarantee::uniform;
  long trials = 100;
  long horizon = 10000;
  double delta = 0.1;
  std::uint64_t base_seed = 0;
  int threads = 1;  // 0 = hardware concurrency
  // Full per-step records for toy/sgd trials. run_experiment clears this on
  // its workers so aggregate memory stays bounded by the checkpoint grid.
  bool record_full_paths = true;
  std::vector<long> checkpoints;  // defaults to the log-spaced grid

  double toy_x0 = 0.1;
  SgdConfig sgd;
  Spectrum spectrum = Spectrum::default_spectrum();
  double pca_x0 = 0.5;
  // When > 0, the PCA trial follows the first `pca_intervals` intervals of
  // the uniform ladder and tests X against each interval's threshold; the
  // horizon is then the last interval boundary.
  int pca_intervals = 0;
  BanditConfig bandit;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials >= 1");
    if (horizon < 1) throw std::invalid_argument("ExperimentSpec: horizon >= 1");
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("ExperimentSpec: delta must lie in (0,1)");
    if (dynamic == Dynamic::sgd) sgd.validate();
    if (dynamic == Dynamic::bandit) bandit.validate();
  }

  // Uniform-guarantee violations are only tested from this step on; the SGD
  // machinery starts at step 100, earlier steps are covered by the
  // almost-sure cap.
  long violation_start() const { return dynamic == Dynamic::sgd ? 100 : 1; }

  long effective_horizon() const {
    if (dynamic == Dynamic::pca && pca_intervals > 0) {
      auto plan = pca_uniform_plan(spectrum.lambda_top(), spectrum.gap(), delta,
                                   pca_intervals);
      return plan.intervals.back().t_end;
    }
    return horizon;
  }

  BanditConfig bandit_config() const {
    BanditConfig cfg = bandit;
    cfg.horizon = horizon;
    cfg.delta = delta;
    return cfg;
  }
};

struct Trajectory {
  std::uint64_t seed = 0;
  bool violated = false;
  std::optional<long> first_violation_t;
  double final_potential = 0.0;
  bool degenerate = false;
  std::vector<double> checkpoint_values;
  // Full per-step records, only kept when record_full_paths is set.
  std::vector<double> potentials;  // X_0 .. X_T
  std::vector<double> noises;      // N_1 .. N_T (toy noise, SGD residual)
  // Bandit extras.
  double regret_total = 0.0;
  bool regret_within_bound = true;
  bool sandwich_ok = true;
  bool quad_cap_ok = true;
};

namespace detail {

class CheckpointCursor {
 public:
  explicit CheckpointCursor(const std::vector<long>& pts) : pts_(pts) {}
  // Call with strictly increasing t; records x for every checkpoint == t.
  void offer(long t, double x, std::vector<double>& out) {
    while (next_ < pts_.size() && pts_[next_] == t) {
      out.push_back(x);
      ++next_;
    }
  }
  void fill_missing(std::vector<double>& out, double x) const {
    while (out.size() < pts_.size()) out.push_back(x);
  }

 private:
  const std::vector<long>& pts_;
  std::size_t next_ = 0;
};

inline void test_violation(ExperimentSpec const& spec, long t, double x, double bound,
                           Trajectory& traj) {
  if (spec.guarantee == Guarantee::uniform && t >= spec.violation_start() && x > bound &&
      !traj.first_violation_t) {
    traj.violated = true;
    traj.first_violation_t = t;
  }
}

inline Trajectory run_toy_trial(const ExperimentSpec& spec, Rng& rng,
                                const std::vector<long>& checkpoints) {
  Trajectory traj;
  CheckpointCursor cursor(checkpoints);
  ToyState state{spec.toy_x0, 0};
  if (spec.record_full_paths) traj.potentials.push_back(state.x);
  for (long t = 1; t <= spec.horizon; ++t) {
    ToyStep step = toy_step(state, rng);
    state = step.state;
    if (spec.record_full_paths) {
      traj.potentials.push_back(state.x);
      traj.noises.push_back(step.noise);
    }
    test_violation(spec, t, state.x, toy_bound(t, spec.delta), traj);
    cursor.offer(t, state.x, traj.checkpoint_values);
  }
  traj.final_potential = state.x;
  if (spec.guarantee == Guarantee::last &&
      state.x > toy_bound(spec.horizon, spec.delta)) {
    traj.violated = true;
    traj.first_violation_t = spec.horizon;
  }
  return traj;
}

inline Trajectory run_sgd_trial(const ExperimentSpec& spec, Rng& rng,
                                const std::vector<long>& checkpoints) {
  Trajectory traj;
  CheckpointCursor cursor(checkpoints);
  const SgdConfig& cfg = spec.sgd;
  Vector w_star = cfg.optimum();
  SgdState state = sgd_initial_state(cfg);
  double x = sgd_potential(state.w, w_star);
  if (spec.record_full_paths) traj.potentials.push_back(x);
  for (long t = 1; t <= spec.horizon; ++t) {
    Vector g = oracle_grad(state.w, cfg, rng);
    if (spec.record_full_paths)
      traj.noises.push_back(sgd_noise_term(state.w, g, t, cfg));
    state = sgd_step_with_grad(state, g, cfg);
    x = sgd_potential(state.w, w_star);
    if (spec.record_full_paths) traj.potentials.push_back(x);
    test_violation(spec, t, x, sgd_bound(t, spec.delta, Guarantee::uniform, cfg), traj);
    cursor.offer(t, x, traj.checkpoint_values);
  }
  traj.final_potential = x;
  if (spec.guarantee == Guarantee::last &&
      x > sgd_bound(spec.horizon, spec.delta, Guarantee::last, cfg)) {
    traj.violated = true;
    traj.first_violation_t = spec.horizon;
  }
  return traj;
}

inline Trajectory run_pca_trial(const ExperimentSpec& spec, Rng& rng,
                                const std::vector<long>& checkpoints, long horizon) {
  Trajectory traj;
  CheckpointCursor cursor(checkpoints);
  const Spectrum& spectrum = spec.spectrum;
  const bool interval_mode = spec.pca_intervals > 0;
  // Rates come from the uniform ladder either way; without an explicit
  // interval count, build just enough intervals to cover the horizon.
  int plan_size = spec.pca_intervals;
  if (!interval_mode) {
    plan_size = 1;
    while (plan_size < 48 &&
           pca_uniform_plan(spectrum.lambda_top(), spectrum.gap(), spec.delta,
                            plan_size)
                   .intervals.back()
                   .t_end < horizon)
      ++plan_size;
  }
  IntervalPlan plan =
      pca_uniform_plan(spectrum.lambda_top(), spectrum.gap(), spec.delta, plan_size);

  OjaState state = oja_initial_state(spectrum, spec.pca_x0);
  double x = pca_potential_incremental(state);
  try {
    std::size_t iv = 0;
    for (long t = 1; t <= horizon; ++t) {
      while (iv + 1 < plan.intervals.size() && t > plan.intervals[iv].t_end) ++iv;
      const Interval& interval = plan.intervals[iv];
      double eta = interval.gamma / (2.0 * spectrum.gap());
      Vector sample = sphere_sample(spectrum, rng);
      pca_incremental_update(state, sample, eta, spectrum);
      x = pca_potential_incremental(state);
      double bound = interval_mode
                         ? interval.threshold
                         : pca_bound(t, spec.delta, Guarantee::uniform, spectrum);
      test_violation(spec, t, x, bound, traj);
      cursor.offer(t, x, traj.checkpoint_values);
      if (t % 1000 == 0) {
        if (pca_drift(state, spectrum) > 1e-6)
          throw SingularError("pca trial: incremental potential drifted");
        pca_renormalize_columns(state);
      }
    }
    traj.final_potential = x;
    if (spec.guarantee == Guarantee::last && !interval_mode &&
        x > pca_bound(horizon, spec.delta, Guarantee::last, spectrum)) {
      traj.violated = true;
      traj.first_violation_t = horizon;
    }
  } catch (const SingularError&) {
    traj.degenerate = true;
    traj.final_potential = x;
    cursor.fill_missing(traj.checkpoint_values, x);
  }
  return traj;
}

inline Trajectory run_bandit_trial(const ExperimentSpec& spec, Rng& rng,
                                   const std::vector<long>& checkpoints) {
  Trajectory traj;
  CheckpointCursor cursor(checkpoints);
  BanditConfig cfg = spec.bandit_config();
  BanditBounds bounds = bandit_bounds(cfg);
  const double beta = beta_t(cfg);
  const Vector truth = cfg.truth();
  BanditState state = bandit_initial_state(cfg);
  double x = state.potential_history.back();
  for (long t = 1; t <= spec.horizon; ++t) {
    std::vector<Vector> decisions = gen_decision_set(cfg, rng);
    const Vector& action = select_action(state, beta, decisions);
    state.cumulative_regret += regret_accounting(decisions, truth, action);
    BanditStepInfo info = bandit_step(state, action, cfg, rng);
    if (cfg.eta() * info.quad_form > 1.0 + 1e-9) traj.quad_cap_ok = false;
    x = state.potential_history.back();
    test_violation(spec, t, x, bounds.potential_threshold, traj);
    std::size_t before = traj.checkpoint_values.size();
    cursor.offer(t, x, traj.checkpoint_values);
    if (traj.checkpoint_values.size() != before) {
      EllipticalSandwich e = elliptical_sandwich(state, cfg);
      double slack = 1e-9 * (1.0 + std::abs(e.rhs2));
      if (!(e.lhs <= e.mid + slack && e.mid <= e.rhs1 + slack &&
            e.rhs1 <= e.rhs2 + slack))
        traj.sandwich_ok = false;
    }
  }
  traj.final_potential = x;
  traj.regret_total = state.cumulative_regret;
  traj.regret_within_bound = state.cumulative_regret <= bounds.regret_bound;
  if (spec.guarantee == Guarantee::last && x > bounds.potential_threshold) {
    traj.violated = true;
    traj.first_violation_t = spec.horizon;
  }
  return traj;
}

}  // namespace detail

inline Trajectory run_trial(const ExperimentSpec& spec, long trial_index) {
  if (trial_index < 0 || trial_index >= spec.trials)
    throw std::invalid_argument("run_trial: trial index out of range");
  std::vector<long> checkpoints =
      spec.checkpoints.empty() ? default_checkpoints(spec.effective_horizon())
                               : spec.checkpoints;
  Rng rng(trial_seed(spec.base_seed, static_cast<std::uint64_t>(trial_index)));
  Trajectory traj;
  switch (spec.dynamic) {
    case Dynamic::toy:
      traj = detail::run_toy_trial(spec, rng, checkpoints);
      break;
    case Dynamic::sgd:
      traj = detail::run_sgd_trial(spec, rng, checkpoints);
      break;
    case Dynamic::pca:
      traj = detail::run_pca_trial(spec, rng, checkpoints, spec.effective_horizon());
      break;
    case Dynamic::bandit:
      traj = detail::run_bandit_trial(spec, rng, checkpoints);
      break;
  }
  traj.seed = trial_seed(spec.base_seed, static_cast<std::uint64_t>(trial_index));
  return traj;
}

struct CheckpointStat {
  long t = 0;
  double mean = 0, p50 = 0, p90 = 0, max = 0, bound = 0;
};

struct TrialRow {
  long trial = 0;
  std::uint64_t seed = 0;
  bool violated = false;
  long first_violation_t = -1;
  double final_x = 0.0;
  bool degenerate = false;
  double regret = 0.0;
};

struct RegretSummary {
  bool present = false;
  double mean = 0, max = 0, bound = 0;
  long within_bound = 0;
};

struct VerificationReport {
  long trials = 0;
  long violations = 0;
  long degenerate_trials = 0;
  double empirical_failure = 0.0;
  double failure_upper_bound = 0.0;  // exact 95% one-sided
  double delta = 0.0;
  bool verdict_pass = false;
  bool sandwich_ok = true;  // bandit only
  bool quad_cap_ok = true;  // bandit only: eta ||x||^2 <= 1 on every step
  std::vector<long> checkpoint_times;
  std::vector<CheckpointStat> checkpoints;
  std::vector<TrialRow> trial_rows;
  RegretSummary regret;
};

inline double checkpoint_bound(const ExperimentSpec& spec, long t) {
  switch (spec.dynamic) {
    case Dynamic::toy:
      return toy_bound(t, spec.delta);
    case Dynamic::sgd:
      return sgd_bound(t, spec.delta, spec.guarantee, spec.sgd);
    case Dynamic::pca: {
      if (spec.pca_intervals > 0) {
        IntervalPlan plan = pca_uniform_plan(spec.spectrum.lambda_top(),
                                             spec.spectrum.gap(), spec.delta,
                                             spec.pca_intervals);
        for (const auto& iv : plan.intervals)
          if (t <= iv.t_end) return iv.threshold;
        return plan.intervals.back().threshold;
      }
      return pca_bound(t, spec.delta, spec.guarantee, spec.spectrum);
    }
    case Dynamic::bandit:
      return bandit_bounds(spec.bandit_config()).potential_threshold;
  }
  return 0.0;
}

inline VerificationReport aggregate_report(const ExperimentSpec& spec,
                                           const std::vector<long>& checkpoints,
                                           std::vector<Trajectory>& trajectories) {
  VerificationReport rep;
  rep.trials = spec.trials;
  rep.delta = spec.delta;
  rep.checkpoint_times = checkpoints;
  rep.trial_rows.reserve(trajectories.size());
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& tr = trajectories[i];
    if (tr.degenerate)
      ++rep.degenerate_trials;
    else if (tr.violated)
      ++rep.violations;
    if (!tr.sandwich_ok) rep.sandwich_ok = false;
    if (!tr.quad_cap_ok) rep.quad_cap_ok = false;
    TrialRow row;
    row.trial = static_cast<long>(i);
    row.seed = tr.seed;
    row.violated = tr.violated;
    row.first_violation_t = tr.first_violation_t.value_or(-1);
    row.final_x = tr.final_potential;
    row.degenerate = tr.degenerate;
    row.regret = tr.regret_total;
    rep.trial_rows.push_back(row);
  }
  rep.empirical_failure =
      static_cast<double>(rep.violations) / static_cast<double>(rep.trials);
  rep.failure_upper_bound = clopper_pearson_upper(rep.violations, rep.trials);
  rep.verdict_pass =
      rep.failure_upper_bound < spec.delta && rep.degenerate_trials == 0;

  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<double> vals;
    vals.reserve(trajectories.size());
    for (const auto& tr : trajectories)
      if (!tr.degenerate && c < tr.checkpoint_values.size())
        vals.push_back(tr.checkpoint_values[c]);
    if (vals.empty()) continue;
    CheckpointStat st;
    st.t = checkpoints[c];
    double sum = 0.0;
    double mx = vals.front();
    for (double v : vals) {
      sum += v;
      mx = std::max(mx, v);
    }
    st.mean = sum / static_cast<double>(vals.size());
    st.p50 = percentile(vals, 0.5);
    st.p90 = percentile(vals, 0.9);
    st.max = mx;
    st.bound = checkpoint_bound(spec, st.t);
    rep.checkpoints.push_back(st);
  }

  if (spec.dynamic == Dynamic::bandit) {
    rep.regret.present = true;
    rep.regret.bound = bandit_bounds(spec.bandit_config()).regret_bound;
    double sum = 0.0;
    for (const auto& tr : trajectories) {
      sum += tr.regret_total;
      rep.regret.max = std::max(rep.regret.max, tr.regret_total);
      if (tr.regret_within_bound) ++rep.regret.within_bound;
    }
    rep.regret.mean = sum / static_cast<double>(trajectories.size());
  }
  return rep;
}

inline VerificationReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<long> checkpoints =
      spec.checkpoints.empty() ? default_checkpoints(spec.effective_horizon())
                               : spec.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                    checkpoints.end());
  ExperimentSpec worker_spec = spec;
  worker_spec.checkpoints = checkpoints;
  worker_spec.record_full_paths = false;  // trials keep only checkpoint values

  std::vector<Trajectory> trajectories(static_cast<std::size_t>(spec.trials));
  unsigned n_threads = spec.threads > 0
                           ? static_cast<unsigned>(spec.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(spec.trials));
  if (n_threads <= 1) {
    for (long i = 0; i < spec.trials; ++i)
      trajectories[static_cast<std::size_t>(i)] = run_trial(worker_spec, i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w]() {
        for (long i = static_cast<long>(w); i < spec.trials;
             i += static_cast<long>(n_threads))
          trajectories[static_cast<std::size_t>(i)] = run_trial(worker_spec, i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return aggregate_report(worker_spec, checkpoints, trajectories);
}

// Writes <path>.checkpoints.csv and <path>.trials.csv (UTF-8, LF endings,
// shortest round-trip decimals).
inline void emit_csv(const VerificationReport& report, const std::string& path) {
  std::filesystem::path base(path);
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());

  std::ofstream ck(path + ".checkpoints.csv", std::ios::binary);
  if (!ck) throw std::runtime_error("emit_csv: cannot open " + path + ".checkpoints.csv");
  ck << "t,mean,p50,p90,max,bound\n";
  for (const auto& st : report.checkpoints) {
    ck << st.t << ',' << format_double(st.mean) << ',' << format_double(st.p50) << ','
       << format_double(st.p90) << ',' << format_double(st.max) << ','
       << format_double(st.bound) << '\n';
  }
  if (!ck.flush()) throw std::runtime_error("emit_csv: write failure (checkpoints)");

  std::ofstream tr(path + ".trials.csv", std::ios::binary);
  if (!tr) throw std::runtime_error("emit_csv: cannot open " + path + ".trials.csv");
  tr << "trial,seed,violated,first_violation_t,final_x\n";
  for (const auto& row : report.trial_rows) {
    tr << row.trial << ',' << row.seed << ',' << (row.violated ? 1 : 0) << ','
       << row.first_violation_t << ',' << format_double(row.final_x) << '\n';
  }
  if (!tr.flush()) throw std::runtime_error("emit_csv: write failure (trials)");
}

}  // namespace stodyn
