#pragma once

// Preprocessing of an input matrix into a graph, and construction of the
// weighted (or 0/1) Laplacian with its diagonally perturbed companion.

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "fiedler/matrix_market.hpp"
#include "fiedler/sparse_core.hpp"

namespace fiedler {

// A preprocessed graph: |A| symmetrized, isolated vertices removed.
struct GraphSource {
  std::size_t original_n = 0;
  std::vector<std::size_t> kept_vertices;  // preprocessed index -> original index
  SparseMatrix matrix;

  std::size_t size() const noexcept { return matrix.rows(); }
};

struct LaplacianPair {
  SparseMatrix L;
  SparseMatrix L_hat;  // L + ||L||_inf * 1e-12 * I
  std::vector<double> D;
  std::vector<double> D_hat;
  double L_inf_norm = 0.0;
};

struct LaplacianOptions {
  bool weighted = true;
  // Include |A(i,i)| in the Laplacian diagonal. Off by default: with it the
  // constant vector is no longer a null vector.
  bool keep_diagonal = false;
};

// (|A| + |A^T|) / 2.
inline SparseMatrix symmetrize(const SparseMatrix& A) {
  std::vector<Triplet> t;
  t.reserve(2 * A.nnz());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double h = std::abs(vals[k]) / 2;
      t.push_back({index_t(i), cols[k], h});
      t.push_back({cols[k], index_t(i), h});
    }
  }
  return SparseMatrix::from_triplets(A.rows(), std::move(t), true);
}

// Drops vertices with no off-diagonal entries. The input is assumed symmetric.
inline GraphSource remove_isolated(const SparseMatrix& A) {
  const std::size_t n = A.rows();
  std::vector<std::size_t> kept;
  std::vector<index_t> new_index(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    bool has_edge = false;
    for (index_t c : A.row_cols(i))
      if (static_cast<std::size_t>(c) != i) {
        has_edge = true;
        break;
      }
    if (has_edge) {
      new_index[i] = static_cast<index_t>(kept.size());
      kept.push_back(i);
    }
  }
  if (kept.empty()) throw InputError("graph is empty after removing isolated vertices");

  std::vector<Triplet> t;
  t.reserve(A.nnz());
  for (std::size_t i : kept) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const index_t j = new_index[static_cast<std::size_t>(cols[k])];
      if (j >= 0) t.push_back({new_index[i], j, vals[k]});
    }
  }
  GraphSource g;
  g.original_n = n;
  g.matrix = SparseMatrix::from_triplets(kept.size(), std::move(t), A.symmetric());
  g.kept_vertices = std::move(kept);
  return g;
}

inline GraphSource preprocess(const SparseMatrix& A) { return remove_isolated(symmetrize(A)); }

// L(i,j) = -w(i,j) for i != j and L(i,i) = sum of the row's weights, where
// w = |A| (or 1 per nonzero when unweighted).
inline LaplacianPair build_laplacian(const GraphSource& G, const LaplacianOptions& opts = {}) {
  const std::size_t n = G.size();
  if (n == 0) throw InputError("cannot build the Laplacian of an empty graph");
  const SparseMatrix& A = G.matrix;

  std::vector<Triplet> t;
  t.reserve(A.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    double diag = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double w = opts.weighted ? std::abs(vals[k]) : 1.0;
      if (static_cast<std::size_t>(cols[k]) == i) {
        if (opts.keep_diagonal) diag += w;
        continue;
      }
      diag += w;
      t.push_back({index_t(i), cols[k], -w});
    }
    t.push_back({index_t(i), index_t(i), diag});
  }

  LaplacianPair out;
  out.L = SparseMatrix::from_triplets(n, std::move(t), true);
  out.L_inf_norm = inf_norm(out.L);
  out.L_hat = add_diagonal(out.L, out.L_inf_norm * 1e-12);
  out.D = out.L.diagonal();
  out.D_hat = out.L_hat.diagonal();
  return out;
}

struct Components {
  std::vector<std::size_t> labels;  // per vertex, numbered in order of first vertex
  std::size_t count = 0;
};

inline Components connected_components(const SparseMatrix& A) {
  const std::size_t n = A.rows();
  constexpr auto unset = static_cast<std::size_t>(-1);
  Components out{std::vector<std::size_t>(n, unset), 0};
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (out.labels[s] != unset) continue;
    out.labels[s] = out.count;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (index_t c : A.row_cols(v)) {
        const auto u = static_cast<std::size_t>(c);
        if (out.labels[u] == unset) {
          out.labels[u] = out.count;
          queue.push_back(u);
        }
      }
    }
    ++out.count;
  }
  return out;
}

inline Components connected_components(const GraphSource& G) { return connected_components(G.matrix); }

// One GraphSource per connected component; kept_vertices still refer to the
// original (pre-removal) indexing.
inline std::vector<GraphSource> split_components(const GraphSource& G) {
  const Components comp = connected_components(G);
  std::vector<std::vector<std::size_t>> members(comp.count);
  std::vector<index_t> local(G.size());
  for (std::size_t v = 0; v < G.size(); ++v) {
    local[v] = static_cast<index_t>(members[comp.labels[v]].size());
    members[comp.labels[v]].push_back(v);
  }
  std::vector<std::vector<Triplet>> trip(comp.count);
  for (std::size_t v = 0; v < G.size(); ++v) {
    const auto cols = G.matrix.row_cols(v);
    const auto vals = G.matrix.row_values(v);
    for (std::size_t k = 0; k < cols.size(); ++k)
      trip[comp.labels[v]].push_back({local[v], local[static_cast<std::size_t>(cols[k])], vals[k]});
  }
  std::vector<GraphSource> out(comp.count);
  for (std::size_t c = 0; c < comp.count; ++c) {
    out[c].original_n = G.original_n;
    for (std::size_t v : members[c]) out[c].kept_vertices.push_back(G.kept_vertices[v]);
    out[c].matrix = SparseMatrix::from_triplets(members[c].size(), std::move(trip[c]), G.matrix.symmetric());
  }
  return out;
}

}  // namespace fiedler
