#pragma once

// Dense kernels on narrow blocks and small square matrices: block
// orthonormalization, cyclic Jacobi eigendecomposition, and pivoted solves.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiedler/sparse_core.hpp"

namespace fiedler {

class SingularSystemError : public std::runtime_error {
public:
  SingularSystemError(double pivot, std::size_t column)
      : std::runtime_error("small_solve: numerically singular system (pivot " + std::to_string(pivot) +
                           " at column " + std::to_string(column) + ")"),
        pivot_(pivot),
        column_(column) {}
  double pivot() const noexcept { return pivot_; }
  std::size_t column() const noexcept { return column_; }

private:
  double pivot_;
  std::size_t column_;
};

class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void fill_uniform(std::span<double> v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& x : v) x = dist(rng);
}

//------------------------------------------------------------------------------
// orthonormalize

struct OrthonormalizeResult {
  MultiVector basis;
  std::size_t replaced = 0;  // columns found dependent and replaced by random vectors
};

namespace detail {

// Projects v against the given orthonormal columns (two passes).
inline void project_out(std::span<double> v, const MultiVector& Q, std::size_t qcols, const Parallel& par) {
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t k = 0; k < qcols; ++k) {
      const auto q = Q.col(k);
      const double c = dot(q, v, par);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
}

}  // namespace detail

// Modified Gram-Schmidt with one reorthogonalization pass. Columns are also
// made orthogonal to `against` (which must itself be orthonormal) when given.
// A column whose norm after projection drops below 1e-10 * (original norm + 1)
// is treated as dependent and replaced by a random vector from `rng`.
inline OrthonormalizeResult orthonormalize(const MultiVector& X, std::mt19937_64& rng,
                                           const MultiVector* against = nullptr, const Parallel& par = serial()) {
  const std::size_t n = X.rows();
  const std::size_t m = X.cols();
  const std::size_t fixed = against ? against->cols() : 0;
  if (against) require_dims(against->rows() == n, "orthonormalize against");
  if (n < m + fixed)
    throw DimensionError("orthonormalize: " + std::to_string(m + fixed) + " columns exceed " + std::to_string(n) +
                         " rows");

  OrthonormalizeResult out{X, 0};
  MultiVector& V = out.basis;
  for (std::size_t j = 0; j < m; ++j) {
    auto v = V.col(j);
    double original = norm2(v, par);
    for (int attempt = 0;; ++attempt) {
      if (against) detail::project_out(v, *against, fixed, par);
      detail::project_out(v, V, j, par);
      const double nrm = norm2(v, par);
      if (std::isfinite(nrm) && nrm > 1e-10 * (original + 1.0)) {
        for (double& x : v) x /= nrm;
        break;
      }
      if (attempt > 8) throw ConvergenceError("orthonormalize: could not generate an independent column");
      if (attempt == 0) ++out.replaced;
      fill_uniform(v, rng);
      original = norm2(v, par);
    }
  }
  return out;
}

inline OrthonormalizeResult orthonormalize(const MultiVector& X, std::uint64_t seed = 0x5eed) {
  std::mt19937_64 rng(seed);
  return orthonormalize(X, rng);
}

//------------------------------------------------------------------------------
// sym_eig

struct SmallEigen {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column j pairs with values[j]
};

// Makes the first entry of largest magnitude positive.
inline void normalize_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (!v.empty() && v[best] < 0)
    for (double& x : v) x = -x;
}

// Cyclic Jacobi rotations.
inline SmallEigen sym_eig(const DenseMatrix& H, int max_sweeps = 100) {
  require_dims(H.rows() == H.cols(), "sym_eig needs a square matrix");
  const std::size_t m = H.rows();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (H(i, j) != H(j, i)) throw std::invalid_argument("sym_eig: matrix is not symmetric");

  DenseMatrix A = H;
  DenseMatrix Y = DenseMatrix::identity(m);
  const double scale = std::max(H.max_abs(), std::numeric_limits<double>::min());

  bool converged = (m <= 1);
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) off = std::max(off, std::abs(A(i, j)));
    if (off <= std::numeric_limits<double>::epsilon() * 1e-2 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = A(q, p) = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double ykp = Y(k, p);
          const double ykq = Y(k, q);
          Y(k, p) = c * ykp - s * ykq;
          Y(k, q) = s * ykp + c * ykq;
        }
      }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) off = std::max(off, std::abs(A(i, j)));
    if (off > 1e-14 * scale) throw ConvergenceError("sym_eig: Jacobi sweeps did not converge");
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return A(a, a) < A(b, b); });

  SmallEigen out{std::vector<double>(m), DenseMatrix(m, m)};
  std::vector<double> column(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.values[j] = A(order[j], order[j]);
    for (std::size_t k = 0; k < m; ++k) column[k] = Y(k, order[j]);
    normalize_sign(column);
    for (std::size_t k = 0; k < m; ++k) out.vectors(k, j) = column[k];
  }
  return out;
}

//------------------------------------------------------------------------------
// small_solve

// Solves S N = B by Gaussian elimination with partial pivoting. S need not be
// exactly symmetric: under inexact inner solves X^T W drifts from symmetry.
inline DenseMatrix small_solve(const DenseMatrix& S, const DenseMatrix& B) {
  require_dims(S.rows() == S.cols() && B.rows() == S.rows(), "small_solve");
  const std::size_t m = S.rows();
  const std::size_t k = B.cols();
  DenseMatrix A = S;
  DenseMatrix X = B;
  const double tiny = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<std::size_t>(m, 1)) *
                      std::max(S.max_abs(), std::numeric_limits<double>::min());
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    if (!(std::abs(A(piv, c)) > tiny)) throw SingularSystemError(A(piv, c), c);
    if (piv != c) {
      for (std::size_t j = 0; j < m; ++j) std::swap(A(c, j), A(piv, j));
      for (std::size_t j = 0; j < k; ++j) std::swap(X(c, j), X(piv, j));
    }
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = A(r, c) / A(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < m; ++j) A(r, j) -= f * A(c, j);
      for (std::size_t j = 0; j < k; ++j) X(r, j) -= f * X(c, j);
    }
  }
  for (std::size_t c = m; c-- > 0;)
    for (std::size_t j = 0; j < k; ++j) {
      double s = X(c, j);
      for (std::size_t t = c + 1; t < m; ++t) s -= A(c, t) * X(t, j);
      X(c, j) = s / A(c, c);
    }
  return X;
}

}  // namespace fiedler
