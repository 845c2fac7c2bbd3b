#pragma once

// Preconditioned conjugate gradient with a diagonal (Jacobi) preconditioner.
//
// The recurrence is the usual z = M^{-1} r form. It produces the same iterates
// as CG on the symmetrically scaled system M^{-1/2} A M^{-1/2} (M^{1/2} x) =
// M^{-1/2} b, whose residual r~ = M^{-1/2} r and direction p~ = M^{1/2} p are
// the quantities the stopping rule and the observer hook are expressed in.
// Stopping rule: ||r~_k||_inf / ||r~_0||_inf <= eps_in with x_0 = 0.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiedler/sparse_core.hpp"

namespace fiedler {

class PreconditionerError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct PcgConfig {
  double eps_in = 1e-6;
  std::size_t max_iters = 30;

  void validate() const {
    if (!(eps_in > 0.0)) throw std::invalid_argument("PcgConfig: eps_in must be positive");
    if (max_iters < 1) throw std::invalid_argument("PcgConfig: max_iters must be at least 1");
  }
};

struct PcgReport {
  std::size_t iterations = 0;
  double achieved_relres = 0.0;   // from the true residual b - A x at exit
  double recursive_relres = 0.0;  // from the recurrence, used for the stopping test
  bool converged = false;
  bool breakdown = false;  // nonpositive curvature p^T A p encountered
  double min_curvature = std::numeric_limits<double>::infinity();
};

// State handed to an observer. Index k = 0 is the starting state (r_0, p_0);
// afterwards the observer sees r_k and, when the loop continues, p_k.
struct PcgIterate {
  std::size_t k = 0;
  std::span<const double> x;
  std::span<const double> r;  // unscaled residual b - A x (recursive)
  std::span<const double> p;  // unscaled direction; empty on the final step
  double curvature = 0.0;     // p_{k-1}^T A p_{k-1}, zero at k = 0
};

using PcgObserver = std::function<void(const PcgIterate&)>;

namespace detail {

inline void check_preconditioner(std::span<const double> M) {
  for (std::size_t i = 0; i < M.size(); ++i)
    if (!(M[i] > 0.0) || !std::isfinite(M[i]))
      throw PreconditionerError("pcg: preconditioner entry " + std::to_string(i) + " is not positive (" +
                                std::to_string(M[i]) + ")");
}

inline double scaled_inf_norm(std::span<const double> r, std::span<const double> inv_sqrt_m) {
  double m = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) m = std::max(m, std::abs(r[i] * inv_sqrt_m[i]));
  return m;
}

}  // namespace detail

inline std::vector<double> pcg_solve(const SparseMatrix& A, std::span<const double> M_diag, std::span<const double> b,
                                     const PcgConfig& cfg, PcgReport& report, const Parallel& par = serial(),
                                     const PcgObserver& observer = {}) {
  const std::size_t n = A.rows();
  require_dims(M_diag.size() == n && b.size() == n, "pcg_solve");
  cfg.validate();
  detail::check_preconditioner(M_diag);
  report = PcgReport{};

  std::vector<double> inv_m(n), inv_sqrt_m(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_m[i] = 1.0 / M_diag[i];
    inv_sqrt_m[i] = 1.0 / std::sqrt(M_diag[i]);
  }

  std::vector<double> x(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  const double r0 = detail::scaled_inf_norm(r, inv_sqrt_m);
  if (r0 == 0.0) {
    report.converged = true;
    return x;
  }

  std::vector<double> z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = z[i] = r[i] * inv_m[i];
  double rz = dot(r, z, par);
  if (observer) observer({0, x, r, p, 0.0});

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    spmv(A, p, q, par);
    const double curvature = dot(p, q, par);
    report.min_curvature = std::min(report.min_curvature, curvature);
    if (!(curvature > 0.0)) {
      report.breakdown = true;
      break;
    }
    const double alpha = rz / curvature;
    par.for_each_block(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
    });
    report.iterations = it;
    report.recursive_relres = detail::scaled_inf_norm(r, inv_sqrt_m) / r0;
    if (report.recursive_relres <= cfg.eps_in) {
      report.converged = true;
      if (observer) observer({it, x, r, {}, curvature});
      break;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv_m[i];
    const double rz_next = dot(r, z, par);
    const double beta = rz_next / rz;
    rz = rz_next;
    par.for_each_block(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) p[i] = z[i] + beta * p[i];
    });
    if (observer) observer({it, x, r, p, curvature});
  }

  spmv(A, x, q, par);
  for (std::size_t i = 0; i < n; ++i) q[i] = b[i] - q[i];
  report.achieved_relres = detail::scaled_inf_norm(q, inv_sqrt_m) / r0;
  return x;
}

inline std::vector<double> pcg_solve(const SparseMatrix& A, std::span<const double> M_diag, std::span<const double> b,
                                     const PcgConfig& cfg, const Parallel& par = serial()) {
  PcgReport report;
  return pcg_solve(A, M_diag, b, cfg, report, par);
}

// Independent solves, one per column of B.
inline MultiVector pcg_solve_block(const SparseMatrix& A, std::span<const double> M_diag, const MultiVector& B,
                                   const PcgConfig& cfg, std::vector<PcgReport>& reports,
                                   const Parallel& par = serial()) {
  require_dims(B.rows() == A.rows(), "pcg_solve_block");
  MultiVector W(B.rows(), B.cols());
  reports.assign(B.cols(), PcgReport{});
  for (std::size_t j = 0; j < B.cols(); ++j) {
    const auto x = pcg_solve(A, M_diag, B.col(j), cfg, reports[j], par);
    std::copy(x.begin(), x.end(), W.col(j).begin());
  }
  return W;
}

}  // namespace fiedler
