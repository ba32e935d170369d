#include <catch2/catch_amalgamated.hpp>

#include "stodyn/matrix.hpp"
#include "stodyn/rng.hpp"

using namespace stodyn;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (auto& v : m.entries()) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("frobenius_norm_sq") {
  CHECK(frobenius_norm_sq(Matrix::identity(2)) == 2.0);
  CHECK(frobenius_norm_sq(Matrix(3, 4)) == 0.0);
  CHECK(frobenius_norm_sq(from_rows({{1, 2}, {3, 4}})) == 30.0);
}

TEST_CASE("weighted_norm_sq") {
  CHECK(weighted_norm_sq({1, 0}, Matrix::identity(2)) == 1.0);
  CHECK(weighted_norm_sq({1, 1}, from_rows({{2, 0}, {0, 3}})) == 5.0);
  CHECK(weighted_norm_sq({0, 0}, from_rows({{2, 0}, {0, 3}})) == 0.0);
  CHECK_THROWS_AS(weighted_norm_sq({1.0}, Matrix::identity(2)), DimensionError);
}

TEST_CASE("sherman_morrison examples") {
  Matrix updated = sherman_morrison(Matrix::identity(2), {1, 0}, {1, 0}, 1.0);
  CHECK(updated(0, 0) == Catch::Approx(0.5));
  CHECK(updated(1, 1) == Catch::Approx(1.0));
  CHECK(updated(0, 1) == Catch::Approx(0.0).margin(1e-15));

  CHECK_THROWS_AS(sherman_morrison(Matrix::identity(2), {1, 0}, {1, 0}, -1.0),
                  SingularError);

  Matrix ainv = from_rows({{0.5, 0}, {0, 1}});
  Matrix out = sherman_morrison(ainv, {0, 1}, {0, 1}, 1.0);
  CHECK(out(0, 0) == Catch::Approx(0.5));
  CHECK(out(1, 1) == Catch::Approx(0.5));
}

TEST_CASE("sherman_morrison inverts rank-one updates exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + static_cast<std::size_t>(rng.raw() % 5);  // 2..6
    Matrix a = random_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);  // well-conditioned
    Matrix ainv = solve_small(a, Matrix::identity(n));
    Vector u(n), v(n);
    for (auto& c : u) c = rng.uniform(-1.0, 1.0);
    for (auto& c : v) c = rng.uniform(-1.0, 1.0);
    double s = rng.uniform(-0.5, 0.5);
    Matrix updated_inv = sherman_morrison(ainv, u, v, s);
    Matrix a_updated = a;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a_updated(i, j) += s * u[i] * v[j];
    Matrix prod = multiply(a_updated, updated_inv);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(prod(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-8));
  }
}

TEST_CASE("solve_small") {
  Matrix b = from_rows({{1, 2}, {3, 4}});
  Matrix x = solve_small(Matrix::identity(2), b);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(x(i, j) == Catch::Approx(b(i, j)));

  Matrix diag = from_rows({{2, 0}, {0, 4}});
  Matrix inv = solve_small(diag, Matrix::identity(2));
  CHECK(inv(0, 0) == Catch::Approx(0.5));
  CHECK(inv(1, 1) == Catch::Approx(0.25));

  CHECK_THROWS_AS(solve_small(Matrix(2, 2), Matrix::identity(2)), SingularError);
}

TEST_CASE("solve_small residual stays small") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 2 + static_cast<std::size_t>(rng.raw() % 5);
    Matrix a = random_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 2.0;
    Matrix b = random_matrix(rng, n, 3);
    Matrix x = solve_small(a, b);
    Matrix r = multiply(a, x);
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double d = r(i, j) - b(i, j);
        num += d * d;
      }
    CHECK(std::sqrt(num) <= 1e-9 * std::sqrt(frobenius_norm_sq(b)) + 1e-12);
  }
}

TEST_CASE("operator norm bounds") {
  auto id = operator_norm_bounds_check(Matrix::identity(3));
  CHECK(id.frobenius == Catch::Approx(std::sqrt(3.0)));
  CHECK(id.operator_estimate == Catch::Approx(1.0));

  auto zero = operator_norm_bounds_check(Matrix(3, 3));
  CHECK(zero.frobenius == 0.0);
  CHECK(zero.operator_estimate == 0.0);

  Rng rng(3);
  Vector u(4), v(3);
  for (auto& c : u) c = rng.uniform(-1.0, 1.0);
  for (auto& c : v) c = rng.uniform(-1.0, 1.0);
  auto rank_one = operator_norm_bounds_check(outer(u, v));
  double expected = norm(u) * norm(v);
  CHECK(rank_one.frobenius == Catch::Approx(expected));
  CHECK(rank_one.operator_estimate == Catch::Approx(expected));
}

TEST_CASE("norm chain on random matrices") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t r = 2 + static_cast<std::size_t>(rng.raw() % 5);
    std::size_t c = 2 + static_cast<std::size_t>(rng.raw() % 5);
    Matrix a = random_matrix(rng, r, c);
    auto nb = operator_norm_bounds_check(a);
    double root_m = std::sqrt(static_cast<double>(c));
    CHECK(nb.operator_estimate <= nb.frobenius * (1.0 + 1e-6));
    CHECK(nb.frobenius <= root_m * nb.operator_estimate * (1.0 + 1e-6));
  }
}

TEST_CASE("trace inequalities on random pairs") {
  Rng rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t r = 2 + static_cast<std::size_t>(rng.raw() % 4);
    std::size_t c = 2 + static_cast<std::size_t>(rng.raw() % 4);
    Matrix a = random_matrix(rng, r, c);
    Matrix b = random_matrix(rng, c, r);  // sized as A^T
    double tr = trace_product(a, b);
    double fa = std::sqrt(frobenius_norm_sq(a));
    double fb = std::sqrt(frobenius_norm_sq(b));
    CHECK(std::abs(tr) <= fa * fb + 1e-12);                       // Cauchy-Schwarz
    CHECK(std::abs(2.0 * tr) <= fa * fa + fb * fb + 1e-12);       // AM-GM
  }
}
