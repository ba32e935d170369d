#pragma once

// Small dense row-major matrices and the handful of kernels the simulators
// need: Frobenius/weighted norms, rank-one inverse updates, pivoted solves.
// Everything here is sized for d <= 64; no attempt at blocking or BLAS.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stodyn {

using Vector = std::vector<double>;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a pivot or rank-one denominator falls below the relative
// tolerance kSingularTol instead of silently producing NaN.
struct SingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kSingularTol = 1e-12;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const std::vector<double>& entries() const { return a_; }
  std::vector<double>& entries() { return a_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

inline double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DimensionError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm_sq(const Vector& x) { return dot(x, x); }
inline double norm(const Vector& x) { return std::sqrt(norm_sq(x)); }

inline Vector matvec(const Matrix& A, const Vector& x) {
  if (A.cols() != x.size()) throw DimensionError("matvec: size mismatch");
  Vector y(A.rows(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline Matrix multiply(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.rows()) throw DimensionError("multiply: size mismatch");
  Matrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.cols(); ++k) {
      double aik = A(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < B.cols(); ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

inline Matrix transpose(const Matrix& A) {
  Matrix T(A.cols(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
  return T;
}

inline Matrix outer(const Vector& u, const Vector& v) {
  Matrix M(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) M(i, j) = u[i] * v[j];
  return M;
}

inline double trace_product(const Matrix& A, const Matrix& B) {
  // tr(AB) without forming the product.
  if (A.cols() != B.rows() || A.rows() != B.cols())
    throw DimensionError("trace_product: shapes not conformable");
  double s = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * B(j, i);
  return s;
}

inline double frobenius_norm_sq(const Matrix& A) {
  double s = 0.0;
  for (double v : A.entries()) s += v * v;
  return s;
}

// x^T A x for square A.
inline double weighted_norm_sq(const Vector& x, const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() != x.size())
    throw DimensionError("weighted_norm_sq: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) row += A(i, j) * x[j];
    s += x[i] * row;
  }
  return s;
}

// (A + scale*u v^T)^{-1} from Ainv by the rank-one update formula.
inline Matrix sherman_morrison(const Matrix& Ainv, const Vector& u, const Vector& v,
                               double scale) {
  if (Ainv.rows() != Ainv.cols() || Ainv.rows() != u.size() || u.size() != v.size())
    throw DimensionError("sherman_morrison: size mismatch");
  Vector au = matvec(Ainv, u);
  Vector va = matvec(transpose(Ainv), v);  // v^T Ainv as a column
  double denom = 1.0 + scale * dot(v, au);
  if (std::abs(denom) < kSingularTol)
    throw SingularError("sherman_morrison: update denominator ~ 0");
  Matrix out = Ainv;
  double f = scale / denom;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) -= f * au[i] * va[j];
  return out;
}

// Solves A X = B for small square A by Gaussian elimination with partial
// pivoting. Pivot below kSingularTol * ||A||_F flags the system as singular.
inline Matrix solve_small(const Matrix& A, const Matrix& B) {
  if (A.rows() != A.cols()) throw DimensionError("solve_small: A not square");
  if (A.rows() != B.rows()) throw DimensionError("solve_small: row mismatch");
  const std::size_t n = A.rows();
  const std::size_t m = B.cols();
  double scale = std::sqrt(frobenius_norm_sq(A));
  Matrix U = A;
  Matrix X = B;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(U(r, col)) > std::abs(U(piv, col))) piv = r;
    if (std::abs(U(piv, col)) <= kSingularTol * scale)
      throw SingularError("solve_small: numerically singular");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(U(col, j), U(piv, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(X(col, j), X(piv, j));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = U(r, col) / U(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) U(r, j) -= f * U(col, j);
      for (std::size_t j = 0; j < m; ++j) X(r, j) -= f * X(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = X(col, j);
      for (std::size_t k = col + 1; k < n; ++k) s -= U(col, k) * X(k, j);
      X(col, j) = s / U(col, col);
    }
  }
  return X;
}

struct NormBounds {
  double frobenius = 0.0;
  double operator_estimate = 0.0;  // power-iteration estimate of the top singular value
};

// Frobenius norm plus a 100-step power-iteration estimate of the operator
// norm, started from the normalized all-ones vector. The estimate never
// exceeds the true norm, so sigma <= ||A||_F <= sqrt(cols) * sigma holds up
// to iteration slack on generic inputs.
inline NormBounds operator_norm_bounds_check(const Matrix& A) {
  NormBounds out;
  out.frobenius = std::sqrt(frobenius_norm_sq(A));
  if (out.frobenius == 0.0) return out;
  Vector v(A.cols(), 1.0 / std::sqrt(static_cast<double>(A.cols())));
  Matrix At = transpose(A);
  for (int it = 0; it < 100; ++it) {
    Vector w = matvec(At, matvec(A, v));
    double n = norm(w);
    if (n == 0.0) return out;  // start vector in the null space
    for (std::size_t i = 0; i < w.size(); ++i) w[i] /= n;
    v = std::move(w);
  }
  out.operator_estimate = norm(matvec(A, v));
  return out;
}

}  // namespace stodyn
