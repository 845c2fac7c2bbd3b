#pragma once

// Spectral reordering by sorting the Fiedler vector, and the relative
// bandweight metric
//
//   w_k(A) = sum_{|i-j| < k} |A(i,j)|  /  sum_{i,j} |A(i,j)|
//
// Note the strict inequality: k = 1 covers only the diagonal.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiedler/sparse_core.hpp"

namespace fiedler {

class Permutation {
public:
  Permutation() = default;

  // forward[new] = old
  explicit Permutation(std::vector<std::size_t> forward) : forward_(std::move(forward)), inverse_(forward_.size()) {
    std::vector<bool> seen(forward_.size(), false);
    for (std::size_t k = 0; k < forward_.size(); ++k) {
      const std::size_t old = forward_[k];
      if (old >= forward_.size() || seen[old]) throw std::invalid_argument("Permutation: not a bijection");
      seen[old] = true;
      inverse_[old] = k;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> f(n);
    std::iota(f.begin(), f.end(), 0);
    return Permutation(std::move(f));
  }

  std::size_t size() const noexcept { return forward_.size(); }
  const std::vector<std::size_t>& forward() const noexcept { return forward_; }
  const std::vector<std::size_t>& inverse() const noexcept { return inverse_; }

  Permutation inverted() const { return Permutation(inverse_); }

private:
  std::vector<std::size_t> forward_;
  std::vector<std::size_t> inverse_;
};

// Indices of x in ascending value order; ties keep ascending index.
inline Permutation fiedler_permutation(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("fiedler_permutation: non-finite entry");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  return Permutation(std::move(order));
}

// result(i, j) = A(forward[i], forward[j]).
inline SparseMatrix apply_permutation(const SparseMatrix& A, const Permutation& P) {
  require_dims(P.size() == A.rows(), "apply_permutation");
  const auto& inv = P.inverse();
  auto t = A.triplets();
  for (auto& e : t) {
    e.row = static_cast<index_t>(inv[static_cast<std::size_t>(e.row)]);
    e.col = static_cast<index_t>(inv[static_cast<std::size_t>(e.col)]);
  }
  return SparseMatrix::from_triplets(A.rows(), std::move(t), A.symmetric());
}

// Row-major accumulation over the stored entries.
inline double bandweight(const SparseMatrix& A, std::size_t k) {
  if (k < 1) throw std::invalid_argument("bandweight: half-width must be at least 1");
  double inside = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double a = std::abs(vals[c]);
      const auto j = static_cast<std::size_t>(cols[c]);
      const std::size_t dist = i > j ? i - j : j - i;
      if (dist < k) inside += a;
      total += a;
    }
  }
  if (total == 0.0) throw std::invalid_argument("bandweight: matrix has no nonzero entries");
  return inside / total;
}

struct BandweightProfile {
  std::vector<std::size_t> half_widths;
  std::vector<double> weights;
  double total_weight = 0.0;
};

// Each weight is bandweight(A, k), so the profile is nondecreasing in k.
inline BandweightProfile bandweight_profile(const SparseMatrix& A, std::span<const std::size_t> ks) {
  if (ks.empty()) throw std::invalid_argument("bandweight_profile: no half-widths given");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) throw std::invalid_argument("bandweight_profile: half-width must be at least 1");
    if (i && ks[i] <= ks[i - 1]) throw std::invalid_argument("bandweight_profile: half-widths must ascend");
  }
  BandweightProfile out;
  out.half_widths.assign(ks.begin(), ks.end());
  for (std::size_t k : ks) out.weights.push_back(bandweight(A, k));
  for (double v : A.values()) out.total_weight += std::abs(v);
  return out;
}

// Up to `count` logarithmically spaced half-widths in [1, n], deduplicated.
inline std::vector<std::size_t> default_half_widths(std::size_t n, std::size_t count = 32) {
  std::set<std::size_t> ks;
  if (n == 0) return {};
  ks.insert(1);
  ks.insert(n);
  const double top = std::log(static_cast<double>(n));
  for (std::size_t t = 0; t < count; ++t) {
    const double frac = count > 1 ? static_cast<double>(t) / static_cast<double>(count - 1) : 1.0;
    ks.insert(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(std::exp(frac * top))), 1, n));
  }
  return {ks.begin(), ks.end()};
}

inline void write_bandweight_csv(std::ostream& out, const BandweightProfile& profile) {
  out << "k,bandweight\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.half_widths.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", profile.weights[i]);
    out << profile.half_widths[i] << "," << buf << "\n";
  }
}

inline void write_permutation(std::ostream& out, const Permutation& P, const std::string& matrix_name,
                              double lambda2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", lambda2);
  out << "# matrix: " << matrix_name << "\n";
  out << "# lambda2: " << buf << "\n";
  out << "# one 0-based original index per line, in new order\n";
  for (std::size_t old : P.forward()) out << old << "\n";
}

}  // namespace fiedler
