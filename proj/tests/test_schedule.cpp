#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stodyn/schedule.hpp"

using namespace stodyn;

TEST_CASE("build_levels multiplicative") {
  auto levels = build_levels(LevelRule::multiplicative, 1.0, std::pow(2.0, -10));
  REQUIRE(levels.size() == 10);
  for (int i = 0; i < 10; ++i)
    CHECK(levels[static_cast<std::size_t>(i)] == Catch::Approx(std::pow(2.0, -(i + 1))));

  CHECK(build_levels(LevelRule::multiplicative, 1.0, 0.5).size() == 1);
  CHECK_THROWS_AS(build_levels(LevelRule::multiplicative, 1.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_levels(LevelRule::greedy, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("multiplicative ladder length is exactly ceil(log2(x0/eps))") {
  for (int k = 1; k <= 30; ++k) {
    double eps_pow = std::pow(2.0, -k);
    CHECK(build_levels(LevelRule::multiplicative, 1.0, eps_pow).size() ==
          static_cast<std::size_t>(k));
    double ratio_plus = std::pow(2.0, k) + 1.0;
    CHECK(build_levels(LevelRule::multiplicative, 1.0, 1.0 / ratio_plus).size() ==
          static_cast<std::size_t>(k + 1));
  }
}

TEST_CASE("build_levels polynomial") {
  double eps = 4.0 * std::exp(-std::exp(1.0));
  auto levels = build_levels(LevelRule::polynomial, 1.0, eps);
  CHECK(levels.size() == 4);
  // closed form a_i = (eps/4) (4 x0 / eps)^{(3/4)^i}
  for (std::size_t i = 0; i < levels.size(); ++i) {
    double expect = (eps / 4.0) * std::pow(4.0 / eps, std::pow(0.75, i + 1.0));
    CHECK(levels[i] == Catch::Approx(expect));
  }
  CHECK(levels.back() <= eps);
}

TEST_CASE("split_confidence") {
  CHECK(split_confidence(0.2, 3) == Catch::Approx(1.0 / 90.0));
  CHECK(split_confidence(0.2, 1) == Catch::Approx(0.1));
  CHECK_THROWS_AS(split_confidence(0.2, 0), std::invalid_argument);

  double sum = 0.0;
  for (int i = 1; i <= 1000000; ++i) sum += split_confidence(0.999999999, i);
  CHECK(sum == Catch::Approx(0.8224669).epsilon(1e-4));
  CHECK(sum < 1.0);
}

TEST_CASE("confidence budget for any prefix") {
  for (double delta : {0.2, 0.1, 0.01}) {
    double sum = 0.0;
    for (int i = 1; i <= 500; ++i) {
      sum += split_confidence(delta, i);
      CHECK(sum <= delta);
    }
  }
}

TEST_CASE("sgd_uniform_plan sequences") {
  auto plan = sgd_uniform_plan(1.0, 1.0, 0.1, 6);
  REQUIRE(plan.intervals.size() == 6);
  const auto& first = plan.intervals.front();
  CHECK(first.t_start == 100);
  CHECK(first.delta == Catch::Approx(0.05));
  CHECK(first.a_end == Catch::Approx(10.0 * std::log(20.0)));
  CHECK(first.a_start == Catch::Approx(10.0 * std::log(10.0)));
  CHECK(first.threshold == Catch::Approx(2.0 * first.a_start));

  long expect_t = 100;
  for (const auto& iv : plan.intervals) {
    CHECK(iv.t_start == expect_t);
    CHECK(iv.t_end == 2 * expect_t);
    expect_t *= 2;
  }
  CHECK(plan.intervals[1].threshold == Catch::Approx(2.0 * plan.intervals[0].a_end));
  CHECK(plan.start_cap == Catch::Approx(4.0));
}

TEST_CASE("sgd_interval_deviation closed form") {
  double delta_p = std::exp(-1.0);
  CHECK(sgd_interval_deviation(1.0, 1.0, 100, 200, 1.0 / 140.0, delta_p) ==
        Catch::Approx(1.2).epsilon(1e-12));

  // Lambda -> 0 leaves only the additive 50 term.
  double tail = sgd_interval_deviation(1.0, 1.0, 100, 200, 1e-300, delta_p);
  CHECK(tail == Catch::Approx((200.0 / 1e4) * 50.0).epsilon(1e-6));

  // More-than-doubling in T1.
  double base = sgd_interval_deviation(1.0, 1.0, 100, 200, 0.01, 0.1);
  double doubled = sgd_interval_deviation(1.0, 1.0, 100, 400, 0.01, 0.1);
  CHECK(doubled > 2.0 * base);

  CHECK_THROWS_AS(sgd_interval_deviation(1.0, 1.0, 50, 200, 1.0, 0.1),
                  std::domain_error);
}

TEST_CASE("verify_plan passes the SGD ladder") {
  for (double delta : {0.2, 0.1, 0.01}) {
    auto plan = sgd_uniform_plan(1.0, 1.0, delta, 20);
    auto checks = verify_plan(plan, sgd_plan_deviation_fn(1.0, 1.0), sgd_plan_decay_fn());
    REQUIRE(checks.size() == 20);
    for (const auto& c : checks) {
      INFO("delta=" << delta << " interval " << c.index);
      CHECK(c.status == IntervalStatus::pass);
      CHECK(c.pullout_margin > 0.0);
      CHECK(c.improvement_margin > 0.0);
    }
  }
}

TEST_CASE("verify_plan flags an undersized threshold") {
  auto plan = sgd_uniform_plan(1.0, 1.0, 0.1, 6);
  for (auto& iv : plan.intervals) iv.threshold = iv.a_start;  // drop the factor 2
  auto checks = verify_plan(plan, sgd_plan_deviation_fn(1.0, 1.0), sgd_plan_decay_fn());
  CHECK(checks.front().status == IntervalStatus::fail);
  CHECK(checks.front().pullout_margin <= 0.0);
  bool any_fail = false;
  for (const auto& c : checks) any_fail = any_fail || c.status == IntervalStatus::fail;
  CHECK(any_fail);
}

TEST_CASE("pca_uniform_plan construction") {
  double lam = 0.55, gap = 0.175, delta = 0.1;
  auto plan = pca_uniform_plan(lam, gap, delta, 13);
  REQUIRE(plan.intervals.size() == 13);
  const auto& first = plan.intervals.front();
  CHECK(first.t_start == 0);
  CHECK(first.a_start == 1.0);
  double expected_gamma = gap * gap / (29500.0 * lam * std::log(20.0));
  CHECK(first.gamma == Catch::Approx(expected_gamma));
  CHECK(first.gamma == Catch::Approx(6.30e-7).epsilon(0.01));
  CHECK(first.threshold == Catch::Approx(2.0));

  for (std::size_t i = 0; i < plan.intervals.size(); ++i) {
    const auto& iv = plan.intervals[i];
    CHECK(iv.a_end == Catch::Approx(std::pow(2.0, -static_cast<double>(i + 1))));
    double decay = interval_decay(iv);
    CHECK(decay >= 0.2);
    CHECK(decay <= 0.25);
  }
}

TEST_CASE("pca_interval_deviation closed form") {
  double delta_p = std::exp(-1.0);
  double expect = 8.0 * (std::sqrt(284.0) + std::sqrt(128.0) + 94.0);
  CHECK(pca_interval_deviation(0.5, 1.0, 0.5, 0, 2, 1.0, delta_p) ==
        Catch::Approx(expect).epsilon(1e-12));

  // Lambda -> 0 removes the first radical.
  double small = pca_interval_deviation(0.5, 1.0, 0.5, 0, 2, 1e-300, delta_p);
  CHECK(small == Catch::Approx(8.0 * (std::sqrt(128.0) + 94.0)).epsilon(1e-6));

  // Proof variant drops gamma from the second radical.
  double stmt = pca_interval_deviation(0.5, 1.0, 0.5, 0, 2, 1.0, delta_p,
                                       PcaDeviationVariant::statement);
  double proof = pca_interval_deviation(0.5, 1.0, 0.5, 0, 2, 1.0, delta_p,
                                        PcaDeviationVariant::proof);
  CHECK(proof == Catch::Approx(8.0 * (std::sqrt(284.0) + 8.0 + 94.0)));
  CHECK(proof < stmt);

  CHECK_THROWS_AS(pca_interval_deviation(0.5, 1.0, 0.5, 0, 2, 1.5, delta_p),
                  std::domain_error);
}

TEST_CASE("verify_plan passes the PCA ladder from interval 2") {
  for (double delta : {0.2, 0.1, 0.01}) {
    auto plan = pca_uniform_plan(0.55, 0.175, delta, 21);
    auto checks =
        verify_plan(plan, pca_plan_deviation_fn(0.55, 0.175), pca_plan_decay_fn());
    REQUIRE(checks.size() == 21);
    // Interval 1 has threshold 2 a_0 = 2, outside the Lambda <= 1 domain of
    // the closed form; it is covered by the start level and the simulation.
    CHECK(checks[0].status == IntervalStatus::outside_domain);
    for (std::size_t i = 1; i < checks.size(); ++i) {
      INFO("delta=" << delta << " interval " << checks[i].index);
      CHECK(checks[i].status == IntervalStatus::pass);
      CHECK(checks[i].pullout_margin > 0.0);
      CHECK(checks[i].improvement_margin > 0.0);
    }
  }
}

TEST_CASE("pca_last_iterate_rates") {
  auto sched = pca_last_iterate_rates(1.0, 1.0, std::exp(-1.0), 8);
  REQUIRE(sched.blocks.size() == 8);
  CHECK(sched.blocks[0].gamma == Catch::Approx(1e-5));
  CHECK(sched.blocks[1].gamma == Catch::Approx(0.5e-5));
  long len1 = sched.blocks[0].t_end - sched.blocks[0].t_start;
  long len2 = sched.blocks[1].t_end - sched.blocks[1].t_start;
  CHECK(std::abs(len2 - 2 * len1) <= 1);  // doubling, up to the step ceiling
  CHECK(sched.threshold_level == Catch::Approx(1000.0));

  // Product of per-block decays stays under 4^{-i}.
  double log_product = 0.0;
  for (std::size_t i = 0; i < sched.blocks.size(); ++i) {
    const auto& b = sched.blocks[i];
    log_product +=
        static_cast<double>(b.t_end - b.t_start) * std::log1p(-b.gamma);
    CHECK(log_product <= -static_cast<double>(i + 1) * std::log(4.0) + 1e-12);
  }

  // Blockwise thresholds follow T * Lambda / t_i^2.
  for (const auto& b : sched.blocks) {
    double te = static_cast<double>(b.t_end);
    CHECK(b.threshold ==
          Catch::Approx(static_cast<double>(sched.horizon) * 1000.0 / (te * te)));
  }
}

TEST_CASE("plan CSV serialization") {
  auto plan = sgd_uniform_plan(1.0, 1.0, 0.1, 3);
  std::ostringstream os;
  plan.write_csv(os);
  std::string text = os.str();
  CHECK(text.rfind("i,t_i,a_i,delta_i,Lambda_i,gamma_i\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.find("1,100,") != std::string::npos);
}
