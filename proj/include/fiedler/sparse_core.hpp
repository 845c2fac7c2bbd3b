#pragma once

// Compressed-row sparse matrices, column-major multivectors, and the block-row
// execution contract used by every kernel in the library.
//
// Work is split over a RowPartition: each block owns a contiguous range of
// rows and writes only those rows. Reductions (dot products, Gram matrices)
// are accumulated over fixed-size row chunks that do not depend on the number
// of workers, then combined in ascending chunk order. Results are therefore
// bitwise identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fiedler {

using index_t = std::int64_t;

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(std::string("dimension mismatch: ") + what);
}

//------------------------------------------------------------------------------
// RowPartition

class RowPartition {
public:
  RowPartition() : boundaries_{0} {}
  explicit RowPartition(std::vector<std::size_t> boundaries) : boundaries_(std::move(boundaries)) {
    if (boundaries_.size() < 2 || boundaries_.front() != 0)
      throw std::invalid_argument("RowPartition: boundaries must start at 0 and hold one block");
    for (std::size_t b = 1; b < boundaries_.size(); ++b)
      if (boundaries_[b] <= boundaries_[b - 1])
        throw std::invalid_argument("RowPartition: boundaries must be strictly increasing");
  }

  std::size_t block_count() const noexcept { return boundaries_.size() - 1; }
  std::size_t rows() const noexcept { return boundaries_.back(); }
  std::size_t begin(std::size_t block) const { return boundaries_[block]; }
  std::size_t end(std::size_t block) const { return boundaries_[block + 1]; }
  const std::vector<std::size_t>& boundaries() const noexcept { return boundaries_; }

private:
  std::vector<std::size_t> boundaries_;
};

// Contiguous blocks whose sizes differ by at most one; the remainder goes to
// the leading blocks.
inline RowPartition partition_rows(std::size_t n, std::size_t blocks) {
  if (blocks == 0 || blocks > n)
    throw std::invalid_argument("partition_rows: need 1 <= blocks <= n (n=" + std::to_string(n) +
                                ", blocks=" + std::to_string(blocks) + ")");
  std::vector<std::size_t> bounds(blocks + 1, 0);
  const std::size_t base = n / blocks;
  const std::size_t extra = n % blocks;
  for (std::size_t b = 0; b < blocks; ++b) bounds[b + 1] = bounds[b] + base + (b < extra ? 1 : 0);
  return RowPartition(std::move(bounds));
}

//------------------------------------------------------------------------------
// Parallel execution context

class Parallel {
public:
  // Row count of one reduction chunk. Fixed so that reductions do not depend
  // on the worker count.
  static constexpr std::size_t kReductionChunk = 512;

  explicit Parallel(std::size_t workers = 1) : workers_(std::max<std::size_t>(1, workers)) {}

  std::size_t workers() const noexcept { return workers_; }

  RowPartition partition(std::size_t n) const {
    if (n == 0) return RowPartition();
    return partition_rows(n, std::min(workers_, n));
  }

  // f(row_begin, row_end) is invoked once per block of partition(n).
  template <class F>
  void for_each_block(std::size_t n, F&& f) const {
    if (n == 0) return;
    const RowPartition part = partition(n);
    const auto blocks = static_cast<std::int64_t>(part.block_count());
    if (blocks == 1) {
      f(std::size_t{0}, n);
      return;
    }
#ifdef _OPENMP
#pragma omp parallel for num_threads(static_cast<int>(blocks)) schedule(static, 1)
#endif
    for (std::int64_t b = 0; b < blocks; ++b) f(part.begin(b), part.end(b));
  }

  // Sums `width` accumulators over rows [0, n). acc(row_begin, row_end, out)
  // adds the contribution of a row range into out (length width, zeroed).
  template <class F>
  std::vector<double> reduce(std::size_t n, std::size_t width, F&& acc) const {
    const std::size_t chunks = std::max<std::size_t>(1, (n + kReductionChunk - 1) / kReductionChunk);
    std::vector<double> partial(chunks * width, 0.0);
    const auto nchunks = static_cast<std::int64_t>(chunks);
    auto body = [&](std::int64_t c) {
      const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
      const std::size_t hi = std::min(n, lo + kReductionChunk);
      acc(lo, hi, std::span<double>(partial.data() + c * width, width));
    };
    if (workers_ == 1 || chunks == 1) {
      for (std::int64_t c = 0; c < nchunks; ++c) body(c);
    } else {
#ifdef _OPENMP
#pragma omp parallel for num_threads(static_cast<int>(std::min<std::size_t>(workers_, chunks))) schedule(static)
#endif
      for (std::int64_t c = 0; c < nchunks; ++c) body(c);
    }
    std::vector<double> total(partial.begin(), partial.begin() + static_cast<std::ptrdiff_t>(width));
    for (std::size_t c = 1; c < chunks; ++c)
      for (std::size_t w = 0; w < width; ++w) total[w] += partial[c * width + w];
    return total;
  }

private:
  std::size_t workers_;
};

inline const Parallel& serial() {
  static const Parallel instance(1);
  return instance;
}

//------------------------------------------------------------------------------
// SparseMatrix

struct Triplet {
  index_t row;
  index_t col;
  double value;
};

class SparseMatrix {
public:
  SparseMatrix() = default;

  // Validates the compressed-row invariants. With `symmetric` set, the
  // structural and numeric symmetry of the stored entries is checked too.
  SparseMatrix(std::size_t n, std::vector<std::size_t> row_offsets, std::vector<index_t> col_indices,
               std::vector<double> values, bool symmetric = false)
      : n_(n),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)),
        symmetric_(symmetric) {
    validate();
  }

  // Sums duplicates and drops entries that are (or sum to) zero.
  static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> entries, bool symmetric = false) {
    for (const auto& t : entries)
      if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n)
        throw std::out_of_range("SparseMatrix: triplet index out of range");
    std::stable_sort(entries.begin(), entries.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(entries.size());
    vals.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size();) {
      const index_t r = entries[k].row;
      const index_t c = entries[k].col;
      double v = 0.0;
      for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k) v += entries[k].value;
      if (v == 0.0) continue;
      cols.push_back(c);
      vals.push_back(v);
      ++offsets[static_cast<std::size_t>(r) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals), symmetric);
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({index_t(i), index_t(i), 1.0});
    return from_triplets(n, std::move(t), true);
  }

  std::size_t rows() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  bool symmetric() const noexcept { return symmetric_; }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<index_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const index_t> row_cols(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  // Stored value at (i, j), zero if absent.
  double at(std::size_t i, std::size_t j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<index_t>(j));
    if (it == cols.end() || *it != static_cast<index_t>(j)) return 0.0;
    return values_[row_offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        out.push_back({index_t(i), col_indices_[k], values_[k]});
    return out;
  }

  // True when every stored (i,j,v) has a stored (j,i,v).
  bool is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        const auto j = static_cast<std::size_t>(col_indices_[k]);
        const auto cols = row_cols(j);
        const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<index_t>(i));
        if (it == cols.end() || *it != static_cast<index_t>(i)) return false;
        if (values_[row_offsets_[j] + static_cast<std::size_t>(it - cols.begin())] != values_[k]) return false;
      }
    return true;
  }

private:
  void validate() const {
    if (row_offsets_.size() != n_ + 1 || row_offsets_.front() != 0 || row_offsets_.back() != values_.size() ||
        col_indices_.size() != values_.size())
      throw std::invalid_argument("SparseMatrix: inconsistent compressed-row arrays");
    for (std::size_t i = 0; i < n_; ++i) {
      if (row_offsets_[i + 1] < row_offsets_[i]) throw std::invalid_argument("SparseMatrix: row offsets decrease");
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        const index_t c = col_indices_[k];
        if (c < 0 || static_cast<std::size_t>(c) >= n_)
          throw std::invalid_argument("SparseMatrix: column index out of range");
        if (k > row_offsets_[i] && col_indices_[k - 1] >= c)
          throw std::invalid_argument("SparseMatrix: column indices not strictly increasing in row " +
                                      std::to_string(i));
        if (values_[k] == 0.0) throw std::invalid_argument("SparseMatrix: explicitly stored zero");
        if (!std::isfinite(values_[k])) throw std::invalid_argument("SparseMatrix: non-finite value");
      }
    }
    if (symmetric_ && !is_symmetric()) throw std::invalid_argument("SparseMatrix: flagged symmetric but is not");
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<index_t> col_indices_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

//------------------------------------------------------------------------------
// MultiVector: n x m, column-major.

class MultiVector {
public:
  MultiVector() = default;
  MultiVector(std::size_t n, std::size_t m, double fill = 0.0) : n_(n), m_(m), data_(n * m, fill) {}

  static MultiVector from_column(std::span<const double> x) {
    MultiVector v(x.size(), 1);
    std::copy(x.begin(), x.end(), v.data_.begin());
    return v;
  }

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return m_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * n_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * n_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * n_, n_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * n_, n_}; }

  std::vector<double> column_copy(std::size_t j) const { return {col(j).begin(), col(j).end()}; }

  // Keeps the listed columns, in the given order.
  MultiVector select_columns(std::span<const std::size_t> which) const {
    MultiVector out(n_, which.size());
    for (std::size_t k = 0; k < which.size(); ++k) std::copy(col(which[k]).begin(), col(which[k]).end(), out.col(k).begin());
    return out;
  }

  // Appends the columns of other.
  void append(const MultiVector& other) {
    if (m_ == 0 && n_ == 0) n_ = other.n_;
    require_dims(other.n_ == n_, "MultiVector::append row count");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
    m_ += other.m_;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> data_;
};

//------------------------------------------------------------------------------
// Small dense row-major matrix for q x q quantities (H, Y, S, N, Gram blocks).

class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : r_(rows), c_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t m) {
    DenseMatrix I(m, m);
    for (std::size_t i = 0; i < m; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const noexcept { return r_; }
  std::size_t cols() const noexcept { return c_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * c_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * c_ + j]; }
  const std::vector<double>& data() const noexcept { return data_; }

  DenseMatrix transposed() const {
    DenseMatrix t(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double inf_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < r_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c_; ++j) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  double max_abs() const {
    double best = 0.0;
    for (double v : data_) best = std::max(best, std::abs(v));
    return best;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(r_, c_); ++i) t += (*this)(i, i);
    return t;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    require_dims(a.c_ == b.r_, "DenseMatrix product");
    DenseMatrix out(a.r_, b.c_);
    for (std::size_t i = 0; i < a.r_; ++i)
      for (std::size_t k = 0; k < a.c_; ++k)
        for (std::size_t j = 0; j < b.c_; ++j) out(i, j) += a(i, k) * b(k, j);
    return out;
  }

  friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    require_dims(a.r_ == b.r_ && a.c_ == b.c_, "DenseMatrix difference");
    DenseMatrix out = a;
    for (std::size_t k = 0; k < out.data_.size(); ++k) out.data_[k] -= b.data_[k];
    return out;
  }

private:
  std::size_t r_ = 0;
  std::size_t c_ = 0;
  std::vector<double> data_;
};

//------------------------------------------------------------------------------
// Kernels

// y = A x, each row an ordered sum over its stored entries.
inline void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y,
                 const Parallel& par = serial()) {
  require_dims(x.size() == A.rows() && y.size() == A.rows(), "spmv");
  const auto& off = A.row_offsets();
  const auto& cols = A.col_indices();
  const auto& vals = A.values();
  par.for_each_block(A.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double s = 0.0;
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) s += vals[k] * x[static_cast<std::size_t>(cols[k])];
      y[i] = s;
    }
  });
}

inline std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x, const Parallel& par = serial()) {
  require_dims(x.size() == A.rows(), "spmv");
  std::vector<double> y(A.rows());
  spmv(A, x, y, par);
  return y;
}

inline MultiVector spmm(const SparseMatrix& A, const MultiVector& X, const Parallel& par = serial()) {
  require_dims(X.rows() == A.rows(), "spmm");
  MultiVector Y(X.rows(), X.cols());
  const auto& off = A.row_offsets();
  const auto& cols = A.col_indices();
  const auto& vals = A.values();
  const std::size_t m = X.cols();
  par.for_each_block(A.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto x = X.col(j);
      auto y = Y.col(j);
      for (std::size_t i = lo; i < hi; ++i) {
        double s = 0.0;
        for (std::size_t k = off[i]; k < off[i + 1]; ++k) s += vals[k] * x[static_cast<std::size_t>(cols[k])];
        y[i] = s;
      }
    }
  });
  return Y;
}

inline double dot(std::span<const double> x, std::span<const double> y, const Parallel& par = serial()) {
  require_dims(x.size() == y.size(), "dot");
  return par.reduce(x.size(), 1, [&](std::size_t lo, std::size_t hi, std::span<double> out) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    out[0] += s;
  })[0];
}

inline double norm2(std::span<const double> x, const Parallel& par = serial()) { return std::sqrt(dot(x, x, par)); }

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

// X^T Y. When X and Y are the same object the upper triangle is computed and
// mirrored, so the result is exactly symmetric.
inline DenseMatrix gram(const MultiVector& X, const MultiVector& Y, const Parallel& par = serial()) {
  require_dims(X.rows() == Y.rows(), "gram");
  const std::size_t mx = X.cols();
  const std::size_t my = Y.cols();
  const bool same = (&X == &Y);
  const auto sums = par.reduce(X.rows(), mx * my, [&](std::size_t lo, std::size_t hi, std::span<double> out) {
    for (std::size_t a = 0; a < mx; ++a) {
      const auto x = X.col(a);
      for (std::size_t b = same ? a : 0; b < my; ++b) {
        const auto y = Y.col(b);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
        out[a * my + b] += s;
      }
    }
  });
  DenseMatrix G(mx, my);
  for (std::size_t a = 0; a < mx; ++a)
    for (std::size_t b = 0; b < my; ++b) G(a, b) = (same && b < a) ? sums[b * my + a] : sums[a * my + b];
  return G;
}

// X * C with C a small dense matrix (X.cols() x k).
inline MultiVector multiply(const MultiVector& X, const DenseMatrix& C, const Parallel& par = serial()) {
  require_dims(X.cols() == C.rows(), "multivector times dense");
  MultiVector out(X.rows(), C.cols());
  par.for_each_block(X.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = 0; j < C.cols(); ++j) {
      auto o = out.col(j);
      for (std::size_t k = 0; k < X.cols(); ++k) {
        const double c = C(k, j);
        if (c == 0.0) continue;
        const auto x = X.col(k);
        for (std::size_t i = lo; i < hi; ++i) o[i] += c * x[i];
      }
    }
  });
  return out;
}

// X -= Q * C, the update step of a block projection.
inline void subtract_product(MultiVector& X, const MultiVector& Q, const DenseMatrix& C,
                             const Parallel& par = serial()) {
  require_dims(Q.rows() == X.rows() && Q.cols() == C.rows() && C.cols() == X.cols(), "subtract_product");
  par.for_each_block(X.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = 0; j < X.cols(); ++j) {
      auto x = X.col(j);
      for (std::size_t k = 0; k < Q.cols(); ++k) {
        const double c = C(k, j);
        const auto q = Q.col(k);
        for (std::size_t i = lo; i < hi; ++i) x[i] -= c * q[i];
      }
    }
  });
}

// Max row sum of absolute values of stored entries.
inline double inf_norm(const SparseMatrix& A) {
  double best = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (double v : A.row_values(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

inline SparseMatrix transpose(const SparseMatrix& A) {
  auto t = A.triplets();
  for (auto& e : t) std::swap(e.row, e.col);
  return SparseMatrix::from_triplets(A.rows(), std::move(t), A.symmetric());
}

// A + shift * I.
inline SparseMatrix add_diagonal(const SparseMatrix& A, double shift) {
  auto t = A.triplets();
  for (std::size_t i = 0; i < A.rows(); ++i) t.push_back({index_t(i), index_t(i), shift});
  return SparseMatrix::from_triplets(A.rows(), std::move(t), A.symmetric());
}

}  // namespace fiedler
