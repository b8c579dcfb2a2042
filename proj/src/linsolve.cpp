#include "bnp/linsolve.hpp"

#include <cmath>
#include <vector>

#include "bnp/kernels.hpp"

namespace bnp {

namespace k = kernels;

KrylovResult conjugate_gradient(const LinearOperator& A, std::span<const double> b,
                                std::span<double> x, const KrylovOptions& opts) {
  const std::size_t n = b.size();
  std::vector<double> r(n), p(n), Ap(n);
  A(x, Ap);
  k::axpy(-1.0, Ap, b, r);
  p = r;
  double rr = k::dot(r, r);
  const double bnorm = std::sqrt(k::dot(b, b));
  const double target = std::max(opts.rel_tol * bnorm, opts.abs_tol);

  KrylovResult res;
  res.residual = std::sqrt(rr);
  if (res.residual <= target) {
    res.converged = true;
    return res;
  }
  for (int it = 1; it <= opts.max_iterations; ++it) {
    A(p, Ap);
    const double pAp = k::dot(p, Ap);
    if (!(pAp > 0.0)) {
      res.negative_curvature = true;
      res.iterations = it;
      return res;
    }
    const double alpha = rr / pAp;
    k::axpy(alpha, p, x, x);
    k::axpy(-alpha, Ap, r, r);
    const double rr_new = k::dot(r, r);
    res.iterations = it;
    res.residual = std::sqrt(rr_new);
    if (res.residual <= target) {
      res.converged = true;
      return res;
    }
    k::axpy(rr_new / rr, p, r, p);
    rr = rr_new;
  }
  return res;
}

// Paige-Saunders MINRES without preconditioning.
KrylovResult minres(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                    const KrylovOptions& opts) {
  const std::size_t n = b.size();
  std::vector<double> r1(n), r2(n), y(n), v(n), w(n), w1(n), w2(n);
  A(x, y);
  k::axpy(-1.0, y, b, r1);
  double beta1 = std::sqrt(k::dot(r1, r1));
  const double bnorm = std::sqrt(k::dot(b, b));
  const double target = std::max(opts.rel_tol * bnorm, opts.abs_tol);

  KrylovResult res;
  res.residual = beta1;
  if (beta1 <= target) {
    res.converged = true;
    return res;
  }
  r2 = r1;
  y = r1;
  double beta = beta1, oldb = 0.0;
  double dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  std::fill(w.begin(), w.end(), 0.0);
  std::fill(w2.begin(), w2.end(), 0.0);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    A(v, y);
    if (it >= 2) k::axpy(-beta / oldb, r1, y, y);
    const double alpha = k::dot(v, y);
    k::axpy(-alpha / beta, r2, y, y);
    r1.swap(r2);
    r2 = y;
    oldb = beta;
    beta = std::sqrt(k::dot(y, y));

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alpha;
    const double gbar = sn * dbar - cs * alpha;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const double denom = 1.0 / gamma;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
      x[i] += phi * w[i];
    }
    res.iterations = it;
    res.residual = std::abs(phibar);
    if (res.residual <= target) {
      res.converged = true;
      break;
    }
    if (beta < 1e-300) break;
  }
  // phibar is the recurrence estimate; report the true residual
  A(x, y);
  k::axpy(-1.0, y, b, r1);
  res.residual = std::sqrt(k::dot(r1, r1));
  res.converged = res.residual <= std::max(target * 10.0, opts.abs_tol);
  return res;
}

}  // namespace bnp
