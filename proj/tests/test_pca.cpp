#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stodyn/pca.hpp"

using namespace stodyn;

namespace {

Matrix column(const Vector& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

Spectrum tiny_spectrum() {  // d=3, k=1
  return Spectrum::make({0.6, 0.3, 0.1}, 1);
}

}  // namespace

TEST_CASE("spectrum validation") {
  Spectrum def = Spectrum::default_spectrum();
  CHECK(def.dim() == 8);
  CHECK(def.k == 2);
  CHECK(def.gap() == Catch::Approx(0.175));
  CHECK(def.lambda_top() == Catch::Approx(0.55));
  CHECK_FALSE(def.renormalized);

  Spectrum scaled = Spectrum::make({3.0, 2.0, 1.0}, 1);
  CHECK(scaled.renormalized);
  CHECK(scaled.eigenvalues[0] == Catch::Approx(0.5));

  CHECK_THROWS_AS(Spectrum::make({0.2, 0.8}, 1), std::invalid_argument);  // not sorted
  CHECK_THROWS_AS(Spectrum::make({0.5, 0.5}, 1), std::invalid_argument);  // no gap
}

TEST_CASE("sphere_sample") {
  Rng rng(1);
  Spectrum point_mass = Spectrum::make({1.0, 0.0, 0.0}, 1);
  for (int i = 0; i < 100; ++i) {
    Vector x = sphere_sample(point_mass, rng);
    CHECK(std::abs(x[0]) == 1.0);
    CHECK(x[1] == 0.0);
    CHECK(x[2] == 0.0);
  }

  Spectrum def = Spectrum::default_spectrum();
  const int n = 1000000;
  std::vector<double> freq(def.dim(), 0.0);
  for (int i = 0; i < n; ++i) {
    Vector x = sphere_sample(def, rng);
    CHECK(norm_sq(x) == 1.0);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] != 0.0) freq[j] += 1.0;
  }
  for (std::size_t j = 0; j < def.dim(); ++j) {
    double p = def.eigenvalues[j];
    double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(freq[j] / n - p) <= 4.0 * se);
  }
}

TEST_CASE("oja_step") {
  Matrix w(3, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  Vector e1 = {1, 0, 0};
  Matrix next = oja_step(w, e1, 0.25);
  CHECK(next(0, 0) == Catch::Approx(1.25));  // sampled direction amplified
  CHECK(next(1, 1) == Catch::Approx(1.0));

  Matrix nearly = oja_step(w, e1, 1e-12);
  CHECK(nearly(0, 0) == Catch::Approx(1.0));

  CHECK_THROWS_AS(oja_step(w, e1, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(oja_step(w, e1, 0.0), std::invalid_argument);

  // rank-one difference
  Rng rng(2);
  Matrix w2(4, 2);
  for (auto& v : w2.entries()) v = rng.uniform(-1, 1);
  Vector x = rng.unit_sphere(4);
  Matrix stepped = oja_step(w2, x, 0.2);
  Matrix diff(4, 2);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) diff(i, j) = stepped(i, j) - w2(i, j);
  auto nb = operator_norm_bounds_check(diff);
  CHECK(nb.frobenius == Catch::Approx(nb.operator_estimate));  // rank one
}

TEST_CASE("pca_potential_direct") {
  Spectrum spec = tiny_spectrum();
  CHECK(pca_potential_direct(column({1.0, 0.3, 0.4}), spec) == Catch::Approx(0.25));
  CHECK(pca_potential_direct(column({1.0, 0.0, 0.0}), spec) == 0.0);

  Spectrum two = Spectrum::make({0.5, 0.3, 0.2}, 2);
  Matrix w(3, 2);
  w(1, 0) = 1.0;  // columns e2, e3: V^T W singular
  w(2, 1) = 1.0;
  CHECK_THROWS_AS(pca_potential_direct(w, two), SingularError);
}

TEST_CASE("pca_terms") {
  Spectrum spec = tiny_spectrum();
  Matrix w = column({1.0, 0.3, 0.4});

  PcaTerms t1 = pca_terms(w, {1, 0, 0}, spec);
  CHECK(t1.a == Catch::Approx(1.0));
  CHECK(t1.B(0, 0) == Catch::Approx(1.0));
  CHECK(t1.C(0, 0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(t1.C(1, 0) == Catch::Approx(0.0).margin(1e-15));

  PcaTerms t3 = pca_terms(w, {0, 0, 1}, spec);
  // x = e3 is orthogonal to the top block, so a = 0 and C carries row 0.4.
  CHECK(t3.a == Catch::Approx(0.0).margin(1e-15));
  CHECK(std::sqrt(frobenius_norm_sq(t3.C)) == Catch::Approx(0.4));

  // |a| = ||B||_F for k = 1 on random inputs; <= in general.
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Matrix wr = column({1.0, rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Vector x = rng.unit_sphere(3);
    PcaTerms t = pca_terms(wr, x, spec);
    CHECK(std::abs(t.a) == Catch::Approx(std::sqrt(frobenius_norm_sq(t.B))).margin(1e-12));
  }
  Spectrum two = Spectrum::make({0.5, 0.3, 0.1, 0.1}, 2);
  for (int i = 0; i < 100; ++i) {
    Matrix wr(4, 2);
    for (auto& v : wr.entries()) v = rng.uniform(-1, 1);
    wr(0, 0) += 2.0;
    wr(1, 1) += 2.0;
    Vector x = rng.unit_sphere(4);
    PcaTerms t = pca_terms(wr, x, two);
    CHECK(std::abs(t.a) <= std::sqrt(frobenius_norm_sq(t.B)) + 1e-12);
  }
}

TEST_CASE("oja_initial_state hits the requested potential") {
  Spectrum def = Spectrum::default_spectrum();
  OjaState s = oja_initial_state(def, 0.5);
  CHECK(pca_potential_incremental(s) == Catch::Approx(0.5));
  CHECK(pca_potential_direct(s.W, def) == Catch::Approx(0.5));
}

TEST_CASE("pca_incremental_update single step") {
  Spectrum spec = tiny_spectrum();
  OjaState s;
  s.W = column({1.0, 0.3, 0.4});
  s.Y = column({0.3, 0.4});
  // x = e1: a = 1, B = [1], C = 0, so Y shrinks by 1/(1+eta).
  pca_incremental_update(s, {1, 0, 0}, 0.25, spec);
  CHECK(s.Y(0, 0) == Catch::Approx(0.3 * 0.8));
  CHECK(s.Y(1, 0) == Catch::Approx(0.4 * 0.8));
  CHECK(s.t == 1);
  CHECK(pca_drift(s, spec) <= 1e-12);
}

TEST_CASE("incremental and direct potentials agree over long runs") {
  Spectrum def = Spectrum::default_spectrum();
  double eta = 1e-3;
  for (std::uint64_t seed : {10u, 11u, 12u}) {
    Rng rng(seed);
    OjaState s = oja_initial_state(def, 0.5);
    for (int t = 1; t <= 10000; ++t) {
      pca_incremental_update(s, sphere_sample(def, rng), eta, def);
      if (t % 500 == 0) CHECK(pca_drift(s, def) <= 1e-6);
    }
  }
}

TEST_CASE("column renormalization preserves the ratio") {
  Spectrum def = Spectrum::default_spectrum();
  Rng rng(4);
  OjaState s = oja_initial_state(def, 0.5);
  for (int t = 0; t < 200; ++t)
    pca_incremental_update(s, sphere_sample(def, rng), 0.1, def);
  double before = pca_potential_direct(s.W, def);
  pca_renormalize_columns(s);
  double after = pca_potential_direct(s.W, def);
  CHECK(after == Catch::Approx(before).epsilon(1e-10));
}

TEST_CASE("linearization inequality holds pathwise") {
  Spectrum def = Spectrum::default_spectrum();
  double gamma = 0.02;
  double eta = gamma / (2.0 * def.gap());
  Rng rng(5);
  OjaState s = oja_initial_state(def, 0.5);
  for (int t = 1; t <= 3000; ++t) {
    double x_prev = pca_potential_incremental(s);
    Vector x = sphere_sample(def, rng);
    double noise = pca_linearized_noise(s.Y, x, eta, def);
    pca_incremental_update(s, x, eta, def);
    double x_new = pca_potential_incremental(s);
    CHECK(x_new <= (1.0 - 2.0 * eta * def.gap()) * x_prev + noise + 1e-12);
  }
}

TEST_CASE("stopped paths respect the bounded-difference cap") {
  Spectrum def = Spectrum::default_spectrum();
  double gamma = 0.02;
  double eta = gamma / (2.0 * def.gap());
  const double lambda_thr = 1.0;
  Rng rng(6);
  OjaState s = oja_initial_state(def, 0.5);
  for (int t = 1; t <= 3000; ++t) {
    if (pca_potential_incremental(s) > lambda_thr) break;
    Vector x = sphere_sample(def, rng);
    double noise = pca_linearized_noise(s.Y, x, eta, def);
    CHECK(std::abs(noise) <=
          eta * (20.0 * lambda_thr + 12.0 * std::sqrt(lambda_thr) + 32.0 * eta) + 1e-12);
    pca_incremental_update(s, x, eta, def);
  }
}

TEST_CASE("pca_moment_profile") {
  Spectrum def = Spectrum::default_spectrum();

  // eta = gamma / (2 gap) must stay within (0, 1/4]
  CHECK_THROWS_AS(pca_moment_profile(def, 0.5 * 4.0 * def.gap(), 0),
                  std::invalid_argument);

  // gamma = 0.1 with gap 0.2 sits exactly at eta = 1/4.
  Spectrum g02 = Spectrum::make({0.45, 0.25, 0.15, 0.15}, 1);
  REQUIRE(g02.gap() == Catch::Approx(0.2));
  MomentProfile p = pca_moment_profile(g02, 0.1, 0);
  double eta = 0.1 / (2.0 * 0.2);
  double lam = g02.lambda_top();
  CHECK(p.bounded_diff(0, 1.0) == Catch::Approx(40.0 * eta));
  CHECK(p.cond_mean(0, 1.0) == Catch::Approx(56.0 * eta * eta * lam));
  CHECK(p.cond_var(0, 1.0) ==
        Catch::Approx(eta * eta * lam * (1136.0 + 512.0 * eta * eta)));
  CHECK_THROWS_AS(p.cond_var(1, 1.5), std::domain_error);

  // geometric growth by 1/(1-gamma) per step (squared for the variance)
  CHECK(p.bounded_diff(1, 1.0) / p.bounded_diff(0, 1.0) ==
        Catch::Approx(1.0 / 0.9));
  CHECK(p.cond_var(1, 1.0) / p.cond_var(0, 1.0) == Catch::Approx(1.0 / 0.81));
}

TEST_CASE("pca_bound") {
  Spectrum def = Spectrum::default_spectrum();
  CHECK(pca_bound(1000000, std::exp(-1.0), Guarantee::last, def) ==
        Catch::Approx(1100.0 / 30625.0));
  for (long t : {1L, 10L, 1000L, 100000L})
    CHECK(pca_bound(t, 0.1, Guarantee::uniform, def) >=
          pca_bound(t, 0.1, Guarantee::last, def));

  // both rates scale linearly in the top eigenvalue mass
  CHECK(pca_bound(100, 0.1, Guarantee::last, def) ==
        Catch::Approx(2000.0 * def.lambda_top() * std::log(10.0) /
                      (def.gap() * def.gap() * 100.0)));
}
