#pragma once

// Trace-minimization eigensolver for the smallest eigenpairs of a graph
// Laplacian (the Fiedler pair and optionally a few more).
//
// Each outer iteration:
//   1-4  orthonormalize the block (against converged vectors too), project L
//        onto it and rotate to a section: X^T X = I, X^T L X = diag(rho).
//   5-6  per-column relative residuals ||L x - rho x||_inf / ||L||_inf;
//        columns converge in ascending Ritz order into the deflation set.
//   7    deflate the remaining block against the converged vectors and
//        refill it to full width with random columns.
//   8    W ~ A^{-1} X by diagonally preconditioned CG, with A the perturbed
//        Laplacian until the first (null) vector converged and L afterwards.
//   9-11 S = X^T W, solve S N = X^T X, X <- W N.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiedler/dense_small.hpp"
#include "fiedler/laplacian.hpp"
#include "fiedler/pcg.hpp"
#include "fiedler/sparse_core.hpp"

namespace fiedler {

class DisconnectedGraphError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  std::size_t p = 2;  // eigenpairs wanted
  std::size_t q = 0;  // subspace width; 0 means 3p
  double eps_out = 1e-5;
  PcgConfig pcg{1e-6, 30};
  std::size_t max_outer = 200;
  std::uint64_t seed = 1;

  std::size_t width() const noexcept { return q ? q : 3 * p; }

  void validate() const {
    if (p < 1) throw std::invalid_argument("SolverConfig: p must be at least 1");
    if (width() < p) throw std::invalid_argument("SolverConfig: q must be at least p");
    if (!(eps_out > 0.0)) throw std::invalid_argument("SolverConfig: eps_out must be positive");
    if (max_outer < 1) throw std::invalid_argument("SolverConfig: max_outer must be at least 1");
    pcg.validate();
  }
};

struct DeflationSet {
  MultiVector vectors;  // orthonormal, ascending eigenvalue
  std::vector<double> eigenvalues;
  std::vector<double> residuals;

  std::size_t count() const noexcept { return eigenvalues.size(); }
  const MultiVector* basis() const noexcept { return count() ? &vectors : nullptr; }
};

struct RitzSection {
  MultiVector vectors;         // section: orthonormal, L-diagonalized
  std::vector<double> values;  // ascending Ritz values
  std::size_t replaced = 0;    // columns refilled during orthonormalization
};

// Diagnostics for one outer iteration, passed to an optional observer.
struct OuterIteration {
  std::size_t k = 0;
  std::vector<double> ritz_values;
  std::vector<double> residuals;
  std::size_t n_conv = 0;    // after the convergence test
  double trace = 0.0;        // tr(X^T L X) of the section
  double trace_input = std::numeric_limits<double>::quiet_NaN();  // tr of the block handed to the inner solve
  double orthonormality_error = 0.0;  // max |X^T X - I|
  double offdiag_error = 0.0;         // max |offdiag(X^T L X)| / ||L||_inf
  bool singular_operator = false;     // inner solve used L rather than the perturbed L
  std::vector<PcgReport> inner;
};

using TraceMinObserver = std::function<void(const OuterIteration&)>;

struct FiedlerResult {
  std::vector<double> fiedler_vector;  // unit 2-norm
  double lambda2 = 0.0;                // Rayleigh quotient of fiedler_vector
  double relative_residual = 0.0;      // ||L x - lambda2 x||_inf / ||L||_inf
  bool converged = false;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;  // summed over every column solve
  std::size_t inner_solves = 0;
  std::size_t max_inner_used = 0;  // final inner cap after any stall escalation
  double avg_inner_iterations = 0.0;
  std::vector<double> eigenvalues;  // smallest p, ascending
  std::vector<double> residuals;
  MultiVector eigenvectors;
};

//------------------------------------------------------------------------------

inline double rayleigh_quotient(const SparseMatrix& L, std::span<const double> x, const Parallel& par = serial()) {
  require_dims(x.size() == L.rows(), "rayleigh_quotient");
  const double xx = dot(x, x, par);
  if (xx == 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
  const auto Lx = spmv(L, x, par);
  return dot(x, Lx, par) / xx;
}

// Column j: ||L x_j - sigma_j x_j||_inf / L_inf.
inline std::vector<double> residual_check(const SparseMatrix& L, const MultiVector& X, std::span<const double> sigma,
                                          double L_inf, const Parallel& par = serial()) {
  require_dims(X.rows() == L.rows() && sigma.size() == X.cols(), "residual_check");
  if (!(L_inf > 0.0)) throw std::invalid_argument("residual_check: ||L||_inf must be positive");
  const MultiVector LX = spmm(L, X, par);
  std::vector<double> res(X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) {
    const auto x = X.col(j);
    const auto lx = LX.col(j);
    double m = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) m = std::max(m, std::abs(lx[i] - sigma[j] * x[i]));
    res[j] = m / L_inf;
  }
  return res;
}

// X - Q (Q^T X) for the converged basis Q.
inline MultiVector deflate(const MultiVector& X, const DeflationSet& D, const Parallel& par = serial()) {
  if (D.count() == 0) return X;
  require_dims(D.vectors.rows() == X.rows(), "deflate");
  MultiVector out = X;
  subtract_product(out, D.vectors, gram(D.vectors, X, par), par);
  return out;
}

// Orthonormalizes X (against `against` when given) and rotates it into a
// section of L.
inline RitzSection ritz_step(const SparseMatrix& L, const MultiVector& X, std::mt19937_64& rng,
                             const MultiVector* against = nullptr, const Parallel& par = serial()) {
  auto orth = orthonormalize(X, rng, against, par);
  const MultiVector LV = spmm(L, orth.basis, par);
  DenseMatrix H = gram(orth.basis, LV, par);
  for (std::size_t i = 0; i < H.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) H(i, j) = H(j, i) = 0.5 * (H(i, j) + H(j, i));
  const SmallEigen eig = sym_eig(H);
  return {multiply(orth.basis, eig.vectors, par), eig.values, orth.replaced};
}

inline RitzSection ritz_step(const SparseMatrix& L, const MultiVector& X, std::uint64_t seed = 0x5eed) {
  std::mt19937_64 rng(seed);
  return ritz_step(L, X, rng);
}

//------------------------------------------------------------------------------

namespace detail {

inline double trace_of_projection(const SparseMatrix& L, const MultiVector& X, const Parallel& par) {
  const MultiVector LX = spmm(L, X, par);
  double t = 0.0;
  for (std::size_t j = 0; j < X.cols(); ++j) t += dot(X.col(j), LX.col(j), par);
  return t;
}

inline void section_errors(const SparseMatrix& L, const MultiVector& X, double L_inf, const Parallel& par,
                           OuterIteration& info) {
  const DenseMatrix G = gram(X, X, par);
  const MultiVector LX = spmm(L, X, par);
  const DenseMatrix H = gram(X, LX, par);
  for (std::size_t i = 0; i < G.rows(); ++i)
    for (std::size_t j = 0; j < G.cols(); ++j) {
      info.orthonormality_error = std::max(info.orthonormality_error, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
      if (i != j) info.offdiag_error = std::max(info.offdiag_error, std::abs(H(i, j)) / L_inf);
    }
}

}  // namespace detail

inline FiedlerResult tracemin_fiedler(const LaplacianPair& pair, const SolverConfig& cfg,
                                      const Parallel& par = serial(), const TraceMinObserver& observer = {}) {
  cfg.validate();
  const SparseMatrix& L = pair.L;
  const std::size_t n = L.rows();
  if (n < 2) throw std::invalid_argument("tracemin_fiedler: need at least two vertices");
  if (cfg.p > n) throw std::invalid_argument("tracemin_fiedler: p exceeds the matrix order");
  const double L_inf = pair.L_inf_norm > 0.0 ? pair.L_inf_norm : inf_norm(L);
  if (!(L_inf > 0.0)) throw std::invalid_argument("tracemin_fiedler: Laplacian is zero");
  const std::size_t q = std::min(cfg.width(), n);
  // Two converged eigenvalues this close to zero mean a second null vector.
  const double null_threshold = std::min(cfg.eps_out, 1e-8) * L_inf;
  // Row sums of zero make the constant vector an exact null vector.
  const bool exact_null = norm_inf(spmv(L, std::vector<double>(n, 1.0), par)) <= 1e-14 * L_inf;

  std::mt19937_64 rng(cfg.seed);
  MultiVector X(n, q);
  fill_uniform(X.data(), rng);

  DeflationSet conv;
  conv.vectors = MultiVector(n, 0);
  FiedlerResult result;
  RitzSection section;
  std::vector<double> section_residuals;
  // Inner cap grows only when the outer iteration has stopped making progress.
  PcgConfig inner = cfg.pcg;
  const std::size_t inner_ceiling = std::max(cfg.pcg.max_iters, n);
  double best_lead = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0, lead_conv = 0;
  bool capped = false;

  for (std::size_t k = 1; k <= cfg.max_outer; ++k) {
    result.outer_iterations = k;
    OuterIteration info;
    info.k = k;

    // 1-4
    section = ritz_step(L, X, rng, conv.basis(), par);
    // 5
    section_residuals = residual_check(L, section.vectors, section.values, L_inf, par);
    if (observer) {
      info.ritz_values = section.values;
      info.residuals = section_residuals;
      info.trace = std::accumulate(section.values.begin(), section.values.end(), 0.0);
      detail::section_errors(L, section.vectors, L_inf, par, info);
    }

    // 6
    std::size_t moved = 0;
    while (moved < section.values.size() && conv.count() < cfg.p) {
      // With an exact null vector available, a Ritz value at the null level
      // means the block has found it. Deflating against the computed vector
      // would leave an O(residual) inconsistent part in every later
      // right-hand side, which CG on the singular L cannot remove.
      const bool null_found =
          conv.count() == 0 && exact_null && std::abs(section.values[moved]) <= cfg.eps_out * L_inf;
      if (!null_found && !(section_residuals[moved] < cfg.eps_out)) break;
      if (null_found) {
        MultiVector v(n, 1, 1.0 / std::sqrt(static_cast<double>(n)));
        const double rho = rayleigh_quotient(L, v.col(0), par);
        conv.vectors.append(v);
        conv.eigenvalues.push_back(rho);
        conv.residuals.push_back(residual_check(L, v, std::vector<double>{rho}, L_inf, par)[0]);
      } else {
        conv.vectors.append(MultiVector::from_column(section.vectors.col(moved)));
        conv.eigenvalues.push_back(section.values[moved]);
        conv.residuals.push_back(section_residuals[moved]);
      }
      ++moved;
    }
    info.n_conv = conv.count();
    if (moved) {
      const auto near_zero = std::count_if(conv.eigenvalues.begin(), conv.eigenvalues.end(),
                                           [&](double v) { return std::abs(v) <= null_threshold; });
      if (near_zero > 1)
        throw DisconnectedGraphError("tracemin_fiedler: found " + std::to_string(near_zero) +
                                     " null vectors; the graph is disconnected, solve each component separately");
    }
    if (conv.count() >= cfg.p) {
      if (observer) observer(info);
      break;
    }

    // Leading unconverged residual not improving while inner solves hit the cap:
    // the truncated inner solve cannot separate the wanted eigenvectors.
    const double lead = section_residuals[moved];
    if (conv.count() != lead_conv || lead < 0.9 * best_lead) {
      lead_conv = conv.count();
      best_lead = lead;
      stalled = 0;
    } else if (capped && ++stalled >= 3 && inner.max_iters < inner_ceiling) {
      inner.max_iters = std::min(2 * inner.max_iters, inner_ceiling);
      best_lead = lead;
      stalled = 0;
    }

    // 7
    std::vector<std::size_t> rest(section.values.size() - moved);
    std::iota(rest.begin(), rest.end(), moved);
    X = deflate(section.vectors.select_columns(rest), conv, par);
    const std::size_t target = std::min(q, n - conv.count());
    if (moved || X.cols() != target) {
      if (X.cols() > target) {
        std::vector<std::size_t> keep(target);
        std::iota(keep.begin(), keep.end(), 0);
        X = X.select_columns(keep);
      }
      MultiVector fresh(n, target - X.cols());
      fill_uniform(fresh.data(), rng);
      X.append(fresh);
      X = orthonormalize(X, rng, conv.basis(), par).basis;
    }
    if (observer) info.trace_input = detail::trace_of_projection(L, X, par);

    // 8
    const bool singular = conv.count() > 0;
    info.singular_operator = singular;
    const SparseMatrix& A = singular ? L : pair.L_hat;
    const std::vector<double>& M = singular ? pair.D : pair.D_hat;
    std::vector<PcgReport> reports;
    const MultiVector W = pcg_solve_block(A, M, X, inner, reports, par);
    capped = false;
    for (const auto& r : reports) {
      result.inner_iterations += r.iterations;
      capped = capped || (!r.converged && r.iterations >= inner.max_iters);
    }
    result.inner_solves += reports.size();

    // 9-11
    const DenseMatrix S = gram(X, W, par);
    const DenseMatrix XtX = gram(X, X, par);
    try {
      X = multiply(W, small_solve(S, XtX), par);
    } catch (const SingularSystemError&) {
      // span(W N) = span(W) for nonsingular N; the next orthonormalization
      // refills any collapsed columns.
      X = W;
    }
    if (!X.all_finite()) fill_uniform(X.data(), rng);

    if (observer) {
      info.inner = std::move(reports);
      observer(info);
    }
  }

  result.converged = conv.count() >= cfg.p;
  result.max_inner_used = inner.max_iters;
  result.avg_inner_iterations =
      result.inner_solves ? static_cast<double>(result.inner_iterations) / static_cast<double>(result.inner_solves)
                          : 0.0;

  // Converged pairs first, then the latest section fills any shortfall.
  struct Candidate {
    double value;
    double residual;
    std::vector<double> vec;
  };
  std::vector<Candidate> pool;
  for (std::size_t j = 0; j < conv.count(); ++j)
    pool.push_back({conv.eigenvalues[j], conv.residuals[j], conv.vectors.column_copy(j)});
  if (!result.converged) {
    for (std::size_t j = 0; j < section.values.size(); ++j) {
      bool already = false;
      for (std::size_t c = 0; c < conv.count() && !already; ++c)
        already = std::abs(dot(conv.vectors.col(c), section.vectors.col(j), par)) > 0.5;
      if (!already) pool.push_back({section.values[j], section_residuals[j], section.vectors.column_copy(j)});
    }
  }
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  const std::size_t keep = std::min(cfg.p, pool.size());
  result.eigenvectors = MultiVector(n, keep);
  for (std::size_t j = 0; j < keep; ++j) {
    normalize_sign(pool[j].vec);
    std::copy(pool[j].vec.begin(), pool[j].vec.end(), result.eigenvectors.col(j).begin());
    result.eigenvalues.push_back(pool[j].value);
    result.residuals.push_back(pool[j].residual);
  }

  const std::size_t fiedler_index = std::min<std::size_t>(1, pool.size() - 1);
  std::vector<double> x = pool[fiedler_index].vec;
  const double nrm = norm2(x, par);
  for (double& v : x) v /= nrm;
  normalize_sign(x);
  result.lambda2 = rayleigh_quotient(L, x, par);
  const auto Lx = spmv(L, x, par);
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(Lx[i] - result.lambda2 * x[i]));
  result.relative_residual = r / L_inf;
  result.fiedler_vector = std::move(x);
  return result;
}

}  // namespace fiedler
