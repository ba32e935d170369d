#pragma once

// Command-line front end.
//
//   run        seeded Monte Carlo verification of one dynamic
//   schedule   build + verify an interval ladder, optionally dump CSV
//   deviation  evaluate one closed-form deviation
//
// Exit codes: 0 all verdicts pass, 1 verdict failure, 2 usage/config error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stodyn/stodyn.hpp"

namespace stodyn {

namespace cli_detail {

inline Spectrum parse_spectrum(const std::string& csv, int k) {
  std::vector<double> lams;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) lams.push_back(std::stod(tok));
  }
  Spectrum spec = Spectrum::make(std::move(lams), k);
  if (spec.renormalized)
    std::cerr << "warning: eigenvalues did not sum to 1; renormalized\n";
  return spec;
}

inline void print_report(const VerificationReport& rep) {
  std::printf("trials            %ld\n", rep.trials);
  std::printf("violations        %ld\n", rep.violations);
  std::printf("degenerate        %ld\n", rep.degenerate_trials);
  std::printf("empirical failure %.6g\n", rep.empirical_failure);
  std::printf("95%% upper bound   %.6g  (target delta %.6g)\n", rep.failure_upper_bound,
              rep.delta);
  if (rep.regret.present) {
    std::printf("regret mean/max   %.6g / %.6g  (bound %.6g, within: %ld)\n",
                rep.regret.mean, rep.regret.max, rep.regret.bound,
                rep.regret.within_bound);
    std::printf("sandwich ok       %s\n", rep.sandwich_ok ? "yes" : "no");
  }
  std::printf("\n%10s %14s %14s %14s %14s %14s\n", "t", "mean", "p50", "p90", "max",
              "bound");
  for (const auto& st : rep.checkpoints)
    std::printf("%10ld %14.6g %14.6g %14.6g %14.6g %14.6g\n", st.t, st.mean, st.p50,
                st.p90, st.max, st.bound);
  std::printf("\nverdict: %s\n", rep.verdict_pass ? "PASS" : "FAIL");
}

inline const char* status_name(IntervalStatus s) {
  switch (s) {
    case IntervalStatus::pass:
      return "pass";
    case IntervalStatus::fail:
      return "FAIL";
    case IntervalStatus::outside_domain:
      return "n/a ";
  }
  return "?";
}

struct RunOptions {
  std::string dynamic;
  std::string guarantee = "uniform";
  long trials = 100;
  long horizon = 10000;
  double delta = 0.1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;

  double x0 = 0.1;
  std::size_t dim = 0;  // 0 = per-dynamic default
  double lambda = 1.0;
  double grad_bound = 2.0;
  double radius = 1.0;
  double noise = 1.0;
  std::string eigenvalues;
  int k = 2;
  double pca_x0 = 0.5;
  int intervals = 0;
  int actions = 20;
  double L = 1.0;
  double Lstar = 1.0;
};

inline int do_run(const RunOptions& opt) {
  ExperimentSpec spec;
  spec.guarantee = opt.guarantee == "last" ? Guarantee::last : Guarantee::uniform;
  spec.trials = opt.trials;
  spec.horizon = opt.horizon;
  spec.delta = opt.delta;
  spec.base_seed = opt.seed;
  spec.threads = opt.threads;

  if (opt.dynamic == "toy") {
    spec.dynamic = Dynamic::toy;
    spec.toy_x0 = opt.x0;
  } else if (opt.dynamic == "sgd") {
    spec.dynamic = Dynamic::sgd;
    spec.sgd.dim = opt.dim ? opt.dim : 5;
    spec.sgd.lambda = opt.lambda;
    spec.sgd.grad_bound = opt.grad_bound;
    spec.sgd.radius = opt.radius;
    spec.sgd.noise_radius = opt.noise;
  } else if (opt.dynamic == "pca") {
    spec.dynamic = Dynamic::pca;
    if (!opt.eigenvalues.empty())
      spec.spectrum = parse_spectrum(opt.eigenvalues, opt.k);
    spec.pca_x0 = opt.pca_x0;
    spec.pca_intervals = opt.intervals;
  } else if (opt.dynamic == "bandit") {
    spec.dynamic = Dynamic::bandit;
    spec.bandit.dim = opt.dim ? opt.dim : 4;
    spec.bandit.lambda = opt.lambda;
    spec.bandit.action_bound = opt.L;
    spec.bandit.param_bound = opt.Lstar;
    spec.bandit.actions_per_round = opt.actions;
  } else {
    std::cerr << "error: unknown dynamic '" << opt.dynamic << "'\n";
    return 2;
  }

  VerificationReport rep = run_experiment(spec);
  print_report(rep);
  if (!opt.out.empty()) emit_csv(rep, opt.out);
  return rep.verdict_pass ? 0 : 1;
}

struct ScheduleOptions {
  std::string dynamic;
  std::string guarantee = "uniform";
  double delta = 0.1;
  int intervals = 20;
  double G = 1.0;
  double lambda = 1.0;
  double lambda_top = 0.55;
  double gap = 0.175;
  std::string eigenvalues;
  int k = 2;
  std::string out;
};

inline int do_schedule(const ScheduleOptions& opt) {
  double lambda_top = opt.lambda_top;
  double gap = opt.gap;
  if (!opt.eigenvalues.empty()) {
    Spectrum spec = parse_spectrum(opt.eigenvalues, opt.k);
    lambda_top = spec.lambda_top();
    gap = spec.gap();
  }

  if (opt.dynamic == "pca" && opt.guarantee == "last") {
    auto sched = pca_last_iterate_rates(lambda_top, gap, opt.delta, opt.intervals);
    std::printf("%4s %14s %14s %14s %14s\n", "i", "t_start", "t_end", "gamma_i",
                "Lambda_i");
    for (const auto& b : sched.blocks)
      std::printf("%4d %14ld %14ld %14.6g %14.6g\n", b.index, b.t_start, b.t_end,
                  b.gamma, b.threshold);
    std::printf("threshold level Lambda = %.6g, horizon = %ld\n",
                sched.threshold_level, sched.horizon);
    return 0;
  }

  IntervalPlan plan;
  std::function<double(const Interval&)> dev_fn, decay_fn;
  std::function<double(const Interval&)> alt_fn;  // statement-variant, PCA only
  if (opt.dynamic == "sgd") {
    plan = sgd_uniform_plan(opt.G, opt.lambda, opt.delta, opt.intervals);
    dev_fn = sgd_plan_deviation_fn(opt.G, opt.lambda);
    decay_fn = sgd_plan_decay_fn();
  } else if (opt.dynamic == "pca") {
    plan = pca_uniform_plan(lambda_top, gap, opt.delta, opt.intervals);
    dev_fn = pca_plan_deviation_fn(lambda_top, gap, PcaDeviationVariant::proof);
    alt_fn = pca_plan_deviation_fn(lambda_top, gap, PcaDeviationVariant::statement);
    decay_fn = pca_plan_decay_fn();
  } else {
    std::cerr << "error: schedule supports --dynamic sgd|pca\n";
    return 2;
  }

  auto checks = verify_plan(plan, dev_fn, decay_fn);
  std::printf("%4s %12s %12s %12s %12s %12s %12s  %s\n", "i", "t_i", "a_i", "delta_i",
              "Lambda_i", "Delta_i", "margin", "check");
  bool all_ok = true;
  for (std::size_t i = 0; i < plan.intervals.size(); ++i) {
    const auto& iv = plan.intervals[i];
    const auto& c = checks[i];
    std::printf("%4d %12ld %12.6g %12.6g %12.6g %12.6g %12.6g  %s\n", iv.index,
                iv.t_start, iv.a_end, iv.delta, iv.threshold, c.deviation,
                std::min(c.pullout_margin, c.improvement_margin),
                status_name(c.status));
    if (c.status == IntervalStatus::fail) all_ok = false;
  }
  if (alt_fn) {
    std::printf("\nstatement-variant deviations (audit):\n");
    for (const auto& iv : plan.intervals) {
      double alt;
      try {
        alt = alt_fn(iv);
      } catch (const std::domain_error&) {
        continue;
      }
      std::printf("%4d %12.6g\n", iv.index, alt);
    }
  }
  if (!opt.out.empty()) {
    std::ofstream os(opt.out, std::ios::binary);
    if (!os) {
      std::cerr << "error: cannot open " << opt.out << "\n";
      return 2;
    }
    plan.write_csv(os);
  }
  return all_ok ? 0 : 1;
}

struct DeviationOptions {
  std::string dynamic;
  long T0 = 100;
  long T1 = 200;
  double Lambda = 1.0;
  double delta_prime = 0.1;
  double G = 1.0;
  double lambda = 1.0;
  double gamma = 1e-3;
  double lambda_top = 0.55;
  double gap = 0.175;
  std::string variant = "statement";
  std::size_t dim = 4;
  double L = 1.0;
};

inline int do_deviation(const DeviationOptions& opt) {
  double value = 0.0;
  if (opt.dynamic == "sgd") {
    value = sgd_interval_deviation(opt.G, opt.lambda, opt.T0, opt.T1, opt.Lambda,
                                   opt.delta_prime);
  } else if (opt.dynamic == "pca") {
    auto variant = opt.variant == "proof" ? PcaDeviationVariant::proof
                                          : PcaDeviationVariant::statement;
    value = pca_interval_deviation(opt.gamma, opt.lambda_top, opt.gap, opt.T0, opt.T1,
                                   opt.Lambda, opt.delta_prime, variant);
  } else if (opt.dynamic == "bandit") {
    BanditConfig cfg;
    cfg.dim = opt.dim;
    cfg.lambda = opt.lambda;
    cfg.action_bound = opt.L;
    value = bandit_deviation(cfg, opt.T1, opt.Lambda, opt.delta_prime);
  } else {
    std::cerr << "error: deviation supports --dynamic sgd|pca|bandit\n";
    return 2;
  }
  std::printf("%.17g\n", value);
  return 0;
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv) {
  using namespace cli_detail;
  CLI::App app{"Monte Carlo verification of stochastic learning dynamics"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "simulate trials and test tail thresholds");
  run->add_option("--dynamic", run_opt.dynamic, "toy|sgd|pca|bandit")->required();
  run->add_option("--guarantee", run_opt.guarantee, "last|uniform")
      ->check(CLI::IsMember({"last", "uniform"}));
  run->add_option("--trials", run_opt.trials);
  run->add_option("--horizon", run_opt.horizon);
  run->add_option("--delta", run_opt.delta);
  run->add_option("--seed", run_opt.seed);
  run->add_option("--threads", run_opt.threads);
  run->add_option("--out", run_opt.out, "CSV output path prefix");
  run->add_option("--x0", run_opt.x0, "toy start value");
  run->add_option("--dim", run_opt.dim);
  run->add_option("--lambda", run_opt.lambda);
  run->add_option("--grad-bound", run_opt.grad_bound);
  run->add_option("--radius", run_opt.radius);
  run->add_option("--noise", run_opt.noise);
  run->add_option("--eigenvalues", run_opt.eigenvalues, "comma-separated spectrum");
  run->add_option("--k", run_opt.k);
  run->add_option("--pca-x0", run_opt.pca_x0);
  run->add_option("--intervals", run_opt.intervals,
                  "pca: follow the first n ladder intervals");
  run->add_option("--actions", run_opt.actions);
  run->add_option("--L", run_opt.L);
  run->add_option("--Lstar", run_opt.Lstar);

  ScheduleOptions sch_opt;
  auto* sch = app.add_subcommand("schedule", "build and verify an interval ladder");
  sch->add_option("--dynamic", sch_opt.dynamic, "sgd|pca")->required();
  sch->add_option("--guarantee", sch_opt.guarantee, "uniform|last")
      ->check(CLI::IsMember({"last", "uniform"}));
  sch->add_option("--delta", sch_opt.delta);
  sch->add_option("--intervals", sch_opt.intervals);
  sch->add_option("--G", sch_opt.G);
  sch->add_option("--lambda", sch_opt.lambda);
  sch->add_option("--lambda-top", sch_opt.lambda_top);
  sch->add_option("--gap", sch_opt.gap);
  sch->add_option("--eigenvalues", sch_opt.eigenvalues);
  sch->add_option("--k", sch_opt.k);
  sch->add_option("--out", sch_opt.out, "write the plan as CSV");

  DeviationOptions dev_opt;
  auto* dev = app.add_subcommand("deviation", "evaluate a closed-form deviation");
  dev->add_option("--dynamic", dev_opt.dynamic, "sgd|pca|bandit")->required();
  dev->add_option("--T0", dev_opt.T0);
  dev->add_option("--T1", dev_opt.T1);
  dev->add_option("--Lambda", dev_opt.Lambda);
  dev->add_option("--delta-prime", dev_opt.delta_prime);
  dev->add_option("--G", dev_opt.G);
  dev->add_option("--lambda", dev_opt.lambda);
  dev->add_option("--gamma", dev_opt.gamma);
  dev->add_option("--lambda-top", dev_opt.lambda_top);
  dev->add_option("--gap", dev_opt.gap);
  dev->add_option("--variant", dev_opt.variant)
      ->check(CLI::IsMember({"statement", "proof"}));
  dev->add_option("--dim", dev_opt.dim);
  dev->add_option("--L", dev_opt.L);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return do_run(run_opt);
    if (sch->parsed()) return do_schedule(sch_opt);
    if (dev->parsed()) return do_deviation(dev_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

inline int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("stodyn");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace stodyn
