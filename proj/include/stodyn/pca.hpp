#pragma once

// Streaming top-k subspace estimation via the multiplicative update
// W <- (I + eta x x^T) W on axis-aligned data: samples are +/- e_i with
// probability lambda_i, so the covariance is diag(lambda) and the top-k
// eigenspace is the first k coordinates exactly. The potential is
// X_t = ||Z^T W_t (V^T W_t)^{-1}||_F^2 with V (resp. Z) the first k (resp.
// remaining) standard basis columns. Y_t = Z^T W_t (V^T W_t)^{-1} is also
// maintained incrementally through a rank-one inverse update, which keeps
// the potential O(dk) per step without re-solving.
//
// The update amplifies sampled directions; top directions are sampled more
// often, so the off-subspace ratio Y contracts at rate 1 - 2 eta gap. A
// damping update would drive W toward the bottom eigenspace and could not
// satisfy the contraction the analysis machinery is built on.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stodyn/concentration.hpp"
#include "stodyn/matrix.hpp"
#include "stodyn/rng.hpp"
#include "stodyn/sgd.hpp"  // Guarantee, loglog_clamped

namespace stodyn {

struct Spectrum {
  std::vector<double> eigenvalues;  // nonincreasing, sums to 1
  int k = 1;
  bool renormalized = false;  // input sum was off by more than 1e-9

  std::size_t dim() const { return eigenvalues.size(); }
  double gap() const { return eigenvalues[k - 1] - eigenvalues[k]; }
  double lambda_top() const {
    return std::accumulate(eigenvalues.begin(), eigenvalues.begin() + k, 0.0);
  }

  static Spectrum make(std::vector<double> lams, int k) {
    Spectrum s;
    if (lams.size() < 2) throw std::invalid_argument("Spectrum: need dim >= 2");
    if (k < 1 || k >= static_cast<int>(lams.size()))
      throw std::invalid_argument("Spectrum: need 1 <= k < dim");
    for (std::size_t i = 0; i + 1 < lams.size(); ++i)
      if (lams[i] < lams[i + 1])
        throw std::invalid_argument("Spectrum: eigenvalues must be nonincreasing");
    if (lams.back() < 0.0)
      throw std::invalid_argument("Spectrum: eigenvalues must be nonnegative");
    double sum = std::accumulate(lams.begin(), lams.end(), 0.0);
    if (!(sum > 0.0)) throw std::invalid_argument("Spectrum: zero spectrum");
    s.renormalized = std::abs(sum - 1.0) > 1e-9;
    if (s.renormalized)
      for (auto& v : lams) v /= sum;
    s.eigenvalues = std::move(lams);
    s.k = k;
    if (!(s.gap() > 0.0)) throw std::invalid_argument("Spectrum: eigengap must be positive");
    return s;
  }

  // d = 8, k = 2, eigenvalues (0.30, 0.25, 0.075 x 6): gap 0.175, top mass 0.55.
  static Spectrum default_spectrum() {
    std::vector<double> lams = {0.30, 0.25};
    lams.insert(lams.end(), 6, 0.075);
    return make(std::move(lams), 2);
  }
};

// One sample: +/- e_i with index drawn from the spectrum weights.
inline Vector sphere_sample(const Spectrum& spec, Rng& rng) {
  double u = rng.uniform01();
  std::size_t idx = spec.dim() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    acc += spec.eigenvalues[i];
    if (u < acc) {
      idx = i;
      break;
    }
  }
  Vector x(spec.dim(), 0.0);
  x[idx] = rng.rademacher();
  return x;
}

inline Matrix oja_step(const Matrix& W, const Vector& x, double eta) {
  if (!(eta > 0.0 && eta <= 0.25))
    throw std::invalid_argument("oja_step: rate must lie in (0, 1/4]");
  if (W.rows() != x.size()) throw DimensionError("oja_step: dimension mismatch");
  // W + eta x (x^T W)
  Vector xw(W.cols(), 0.0);
  for (std::size_t i = 0; i < W.rows(); ++i)
    for (std::size_t j = 0; j < W.cols(); ++j) xw[j] += x[i] * W(i, j);
  Matrix out = W;
  for (std::size_t i = 0; i < W.rows(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < W.cols(); ++j) out(i, j) += eta * x[i] * xw[j];
  }
  return out;
}

inline Matrix top_block(const Matrix& W, int k) {
  Matrix A(k, W.cols());
  for (int i = 0; i < k; ++i)
    for (std::size_t j = 0; j < W.cols(); ++j) A(i, j) = W(i, j);
  return A;
}

inline Matrix bottom_block(const Matrix& W, int k) {
  Matrix C(W.rows() - k, W.cols());
  for (std::size_t i = k; i < W.rows(); ++i)
    for (std::size_t j = 0; j < W.cols(); ++j) C(i - k, j) = W(i, j);
  return C;
}

// Z^T W (V^T W)^{-1} computed from scratch. Its squared Frobenius norm is
// invariant under right-multiplication of W by any invertible matrix, so it
// equals ||Z^T Q||_F^2 for an orthonormalization Q of W's columns.
inline Matrix subspace_ratio(const Matrix& W, const Spectrum& spec) {
  Matrix A = top_block(W, spec.k);                       // V^T W, k x k
  Matrix C = bottom_block(W, spec.k);                    // Z^T W
  Matrix Yt = solve_small(transpose(A), transpose(C));   // A^T Y^T = C^T
  return transpose(Yt);
}

inline double pca_potential_direct(const Matrix& W, const Spectrum& spec) {
  return frobenius_norm_sq(subspace_ratio(W, spec));
}

struct PcaTerms {
  double a = 0.0;  // x^T W (V^T W)^{-1} V^T x
  Matrix B;        // (V^T x) (x^T W (V^T W)^{-1}),  k x k
  Matrix C;        // (Z^T x) (x^T W (V^T W)^{-1}),  (d-k) x k
};

inline PcaTerms pca_terms(const Matrix& W, const Vector& x, const Spectrum& spec) {
  const int k = spec.k;
  Matrix A = top_block(W, k);
  // r = x^T W (V^T W)^{-1}: solve A^T r^T = W^T x.
  Vector wx(W.cols(), 0.0);
  for (std::size_t i = 0; i < W.rows(); ++i)
    for (std::size_t j = 0; j < W.cols(); ++j) wx[j] += W(i, j) * x[i];
  Matrix rhs(k, 1);
  for (int j = 0; j < k; ++j) rhs(j, 0) = wx[j];
  Matrix rcol = solve_small(transpose(A), rhs);
  Vector r(k);
  for (int j = 0; j < k; ++j) r[j] = rcol(j, 0);

  Vector x_top(x.begin(), x.begin() + k);
  Vector x_bot(x.begin() + k, x.end());
  PcaTerms terms;
  terms.a = dot(r, x_top);
  terms.B = outer(x_top, r);
  terms.C = outer(x_bot, r);
  return terms;
}

struct OjaState {
  Matrix W;  // d x k iterate
  Matrix Y;  // (d-k) x k, tracks Z^T W (V^T W)^{-1}
  long t = 0;
};

// Local start: identity top block plus one off-subspace direction per column
// scaled so the initial potential equals x0.
inline OjaState oja_initial_state(const Spectrum& spec, double x0 = 0.5) {
  const int k = spec.k;
  const int m = static_cast<int>(spec.dim()) - k;
  if (m < k)
    throw std::invalid_argument("oja_initial_state: needs dim - k >= k directions");
  double alpha = std::sqrt(x0 / static_cast<double>(k));
  OjaState s;
  s.W = Matrix(spec.dim(), k);
  s.Y = Matrix(m, k);
  for (int j = 0; j < k; ++j) {
    s.W(j, j) = 1.0;
    s.W(k + j, j) = alpha;
    s.Y(j, j) = alpha;
  }
  return s;
}

// One streaming step: W through the multiplicative update, Y through the
// matching rank-one inverse update
//   Y' = Y - eta/(1 + eta a) (Y B - C) = Y + eta/(1 + eta a) (x_bot - Y x_top) r^T.
inline void pca_incremental_update(OjaState& s, const Vector& x, double eta,
                                   const Spectrum& spec) {
  const int k = spec.k;
  const std::size_t m = s.Y.rows();
  Vector x_top(x.begin(), x.begin() + k);
  Vector x_bot(x.begin() + k, x.end());
  // r = x_top + Y^T x_bot, using W (V^T W)^{-1} = [I; Y].
  Vector r(k);
  for (int j = 0; j < k; ++j) {
    double v = x_top[j];
    for (std::size_t i = 0; i < m; ++i) v += s.Y(i, j) * x_bot[i];
    r[j] = v;
  }
  double a = dot(r, x_top);
  double denom = 1.0 + eta * a;
  if (std::abs(denom) < kSingularTol)
    throw SingularError("pca_incremental_update: 1 + eta a ~ 0");
  double scale = eta / denom;
  Vector residual(m);  // x_bot - Y x_top
  for (std::size_t i = 0; i < m; ++i) {
    double v = x_bot[i];
    for (int j = 0; j < k; ++j) v -= s.Y(i, j) * x_top[j];
    residual[i] = v;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (residual[i] == 0.0) continue;
    for (int j = 0; j < k; ++j) s.Y(i, j) += scale * residual[i] * r[j];
  }
  s.W = oja_step(s.W, x, eta);
  s.t += 1;
}

inline double pca_potential_incremental(const OjaState& s) {
  return frobenius_norm_sq(s.Y);
}

// Relative disagreement between the tracked Y and a from-scratch solve.
inline double pca_drift(const OjaState& s, const Spectrum& spec) {
  double direct = pca_potential_direct(s.W, spec);
  double inc = pca_potential_incremental(s);
  return std::abs(direct - inc) / std::max({std::abs(direct), std::abs(inc), 1e-12});
}

// Rescales the columns of W to unit norm; Y is invariant under this, and it
// keeps long products of (I - eta x x^T) from underflowing.
inline void pca_renormalize_columns(OjaState& s) {
  for (std::size_t j = 0; j < s.W.cols(); ++j) {
    double n = 0.0;
    for (std::size_t i = 0; i < s.W.rows(); ++i) n += s.W(i, j) * s.W(i, j);
    n = std::sqrt(n);
    if (n <= 0.0) continue;
    for (std::size_t i = 0; i < s.W.rows(); ++i) s.W(i, j) /= n;
  }
}

// One-step residual N_t in X_t <= (1 - 2 eta gap) X_{t-1} + N_t, assembled
// from (a, B, C, Y) with the conditional expectations evaluated exactly
// against the diagonal spectrum.
inline double pca_linearized_noise(const Matrix& Y, const Vector& x, double eta,
                                   const Spectrum& spec) {
  const int k = spec.k;
  const std::size_t m = Y.rows();
  Vector x_top(x.begin(), x.begin() + k);
  Vector x_bot(x.begin() + k, x.end());
  Vector r(k);
  for (int j = 0; j < k; ++j) {
    double v = x_top[j];
    for (std::size_t i = 0; i < m; ++i) v += Y(i, j) * x_bot[i];
    r[j] = v;
  }
  double a = dot(r, x_top);

  // G = Y^T Y (k x k), column norms against the top eigenvalues.
  double e_tr_yyb = 0.0;  // tr(Y^T Y diag(lambda_1..k))
  for (int j = 0; j < k; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m; ++i) col += Y(i, j) * Y(i, j);
    e_tr_yyb += spec.eigenvalues[j] * col;
  }
  double e_tr_yc = 0.0;  // tr(Y^T diag(lambda_{k+1}..d) Y)
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (int j = 0; j < k; ++j) row += Y(i, j) * Y(i, j);
    e_tr_yc += spec.eigenvalues[k + i] * row;
  }

  // tr(Y^T Y B) = r^T (Y^T Y) x_top; tr(Y^T C) = x_bot^T Y r.
  double tr_yyb = 0.0;
  for (int j = 0; j < k; ++j) {
    double gx = 0.0;  // (Y^T Y x_top)_j
    for (std::size_t i = 0; i < m; ++i) {
      double yi_xtop = 0.0;
      for (int l = 0; l < k; ++l) yi_xtop += Y(i, l) * x_top[l];
      gx += Y(i, j) * yi_xtop;
    }
    tr_yyb += r[j] * gx;
  }
  double tr_yc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double yr = 0.0;
    for (int j = 0; j < k; ++j) yr += Y(i, j) * r[j];
    tr_yc += x_bot[i] * yr;
  }

  double r_sq = norm_sq(r);
  double yxtop_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double v = 0.0;
    for (int j = 0; j < k; ++j) v += Y(i, j) * x_top[j];
    yxtop_sq += v * v;
  }
  double yb_sq = yxtop_sq * r_sq;       // ||Y B||_F^2
  double c_sq = norm_sq(x_bot) * r_sq;  // ||C||_F^2

  double denom = 1.0 + eta * a;
  return 2.0 * eta * (-tr_yyb + e_tr_yyb + tr_yc - e_tr_yc) +
         (2.0 * eta * eta * a / denom) * (tr_yyb - tr_yc) +
         (2.0 * eta * eta / (denom * denom)) * (yb_sq + c_sq);
}

// Moment profile at constant rate eta = gamma / (2 gap) from T0, valid for
// thresholds Lambda <= 1:
//   B = 40 eta / (1-gamma)^{t-T0},  mu = 56 eta^2 lambda / (1-gamma)^{t-T0},
//   sigma^2 = eta^2 lambda (1136 Lambda + 512 eta^2) / (1-gamma)^{2(t-T0)}.
inline MomentProfile pca_moment_profile(const Spectrum& spec, double gamma, long T0) {
  double gap = spec.gap();
  double eta = gamma / (2.0 * gap);
  if (!(eta > 0.0 && eta <= 0.25))
    throw std::invalid_argument("pca_moment_profile: rate must lie in (0, 1/4]");
  double lam_top = spec.lambda_top();
  MomentProfile p;
  p.start_time = T0;
  auto decay = [gamma, T0](long t) {
    return std::exp(static_cast<double>(t - T0) * std::log1p(-gamma));
  };
  auto gate = [](double lam) {
    if (lam > 1.0) throw std::domain_error("pca_moment_profile: requires Lambda <= 1");
  };
  p.bounded_diff = [eta, decay, gate](long t, double lam) {
    gate(lam);
    return 40.0 * eta / decay(t);
  };
  p.cond_mean = [eta, lam_top, decay, gate](long t, double lam) {
    gate(lam);
    return 56.0 * eta * eta * lam_top / decay(t);
  };
  p.cond_var = [eta, lam_top, decay, gate](long t, double lam) {
    gate(lam);
    double d = decay(t);
    return eta * eta * lam_top * (1136.0 * lam + 512.0 * eta * eta) / (d * d);
  };
  return p;
}

// Rate values: 2000 lambda log(1/delta) / (gap^2 t) for the last iterate,
// 30000 lambda (log(1/delta) + 2 loglog(t+1)) / (gap^2 t) uniformly.
inline double pca_bound(long t, double delta, Guarantee g, const Spectrum& spec) {
  if (t < 1) throw std::invalid_argument("pca_bound: t >= 1");
  double gap2 = spec.gap() * spec.gap();
  double td = static_cast<double>(t);
  if (g == Guarantee::last)
    return 2000.0 * spec.lambda_top() * std::log(1.0 / delta) / (gap2 * td);
  return 30000.0 * spec.lambda_top() *
         (std::log(1.0 / delta) + 2.0 * loglog_clamped(t)) / (gap2 * td);
}

}  // namespace stodyn
