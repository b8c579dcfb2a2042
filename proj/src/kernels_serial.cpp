#include "bnp/kernels.hpp"

namespace bnp::kernels::serial {

void laplacian(const Stencil& st, std::span<const double> u, std::span<double> out) {
  for (std::size_t i = 0; i < st.nodes; ++i) {
    double acc = st.diag * u[i];
    for (int a = 0; a < st.dim; ++a)
      for (int side = 0; side < 2; ++side) {
        const auto j = st.neighbor(i, a, side);
        if (j >= 0) acc -= st.inv_h2[static_cast<std::size_t>(a)] * u[static_cast<std::size_t>(j)];
      }
    out[i] = acc;
  }
}

double edge_energy(const Stencil& st, std::span<const double> u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < st.nodes; ++i)
    for (int a = 0; a < st.dim; ++a) {
      const double w = st.inv_h2[static_cast<std::size_t>(a)];
      const auto lo = st.neighbor(i, a, 0);
      const auto hi = st.neighbor(i, a, 1);
      const double up = hi >= 0 ? u[static_cast<std::size_t>(hi)] : 0.0;
      acc += w * (up - u[i]) * (up - u[i]);
      if (lo < 0) acc += w * u[i] * u[i];
    }
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double abs_pow_sum(std::span<const double> u, const PowerLaw& p) {
  double acc = 0.0;
  for (double x : u) acc += p(std::abs(x));
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<const double> y,
          std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i] + y[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& e : x) e *= alpha;
}

void gradient_assemble(std::span<const double> lap_v, std::span<const double> u, double lambda,
                       const PowerLaw& q, std::span<double> out) {
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = lap_v[i] - lambda * u[i] - q(std::abs(u[i])) * u[i];
}

void hessian_assemble(std::span<const double> lap_h, std::span<const double> u,
                      std::span<const double> h, double lambda, double coef, const PowerLaw& q,
                      std::span<double> out) {
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = lap_h[i] - lambda * h[i] - coef * q(std::abs(u[i])) * h[i];
}

FiberingSums fibering_sums(double t, std::span<const double> v, std::span<const double> shift,
                           const PowerLaw& q) {
  FiberingSums s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = t * v[i] + shift[i];
    const double pq = q(std::abs(x));
    s.pow_p += pq * x * x;
    s.pow_pv += pq * x * v[i];
    s.pow_qv2 += pq * v[i] * v[i];
  }
  return s;
}

}  // namespace bnp::kernels::serial
