#pragma once
// Matrix-free Krylov solvers for the symmetric systems that arise on the grid.

#include <functional>
#include <span>

namespace bnp {

/// y = A x
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct KrylovOptions {
  double rel_tol = 1e-12;  ///< stop when ||b - A x|| <= rel_tol * ||b||
  double abs_tol = 0.0;
  int max_iterations = 5000;
};

struct KrylovResult {
  int iterations = 0;
  double residual = 0.0;  ///< final Euclidean residual norm
  bool converged = false;
  bool negative_curvature = false;  ///< CG only: p^T A p <= 0 encountered
};

/// Conjugate gradients for symmetric positive definite A; x holds the
/// initial guess on entry.
KrylovResult conjugate_gradient(const LinearOperator& A, std::span<const double> b,
                                std::span<double> x, const KrylovOptions& opts = {});

/// MINRES for symmetric (possibly indefinite) A; x holds the initial guess.
KrylovResult minres(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                    const KrylovOptions& opts = {});

}  // namespace bnp
