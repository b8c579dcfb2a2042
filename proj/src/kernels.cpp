#include "bnp/kernels.hpp"

#include <omp.h>

#include <cassert>

namespace bnp::kernels {

PowerLaw::PowerLaw(double q) : q_(q) {
  const double r = std::round(q);
  if (q > 0.0 && std::abs(q - r) < 1e-14 && r <= 16.0) {
    integral_ = true;
    iq_ = static_cast<int>(r);
  }
}

namespace {

// Below this many nodes the parallel region costs more than it saves.
constexpr std::size_t kParallelMin = 2 * kBlock;

inline std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

// Deterministic reduction of K simultaneous sums.
template <std::size_t K, class Term>
std::array<double, K> blocked_sums(std::size_t n, Term&& term) {
  const std::size_t nb = block_count(n);
  std::vector<std::array<double, K>> partial(nb);
  const auto nbl = static_cast<std::int64_t>(nb);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (std::int64_t b = 0; b < nbl; ++b) {
    std::array<double, K> acc{};
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) term(i, acc);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  std::array<double, K> total{};
  for (const auto& p : partial)
    for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const auto nl = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (std::int64_t i = 0; i < nl; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace

void laplacian(const Stencil& st, std::span<const double> u, std::span<double> out) {
  assert(u.size() == st.nodes && out.size() == st.nodes);
  const int two_d = 2 * st.dim;
  parallel_for(st.nodes, [&](std::size_t i) {
    const std::int32_t* nb = st.neighbors.data() + i * static_cast<std::size_t>(two_d);
    double acc = st.diag * u[i];
    for (int a = 0; a < st.dim; ++a) {
      double s = 0.0;
      if (nb[2 * a] >= 0) s += u[static_cast<std::size_t>(nb[2 * a])];
      if (nb[2 * a + 1] >= 0) s += u[static_cast<std::size_t>(nb[2 * a + 1])];
      acc -= st.inv_h2[static_cast<std::size_t>(a)] * s;
    }
    out[i] = acc;
  });
}

double edge_energy(const Stencil& st, std::span<const double> u) {
  const int two_d = 2 * st.dim;
  return blocked_sums<1>(st.nodes, [&](std::size_t i, std::array<double, 1>& acc) {
    const std::int32_t* nb = st.neighbors.data() + i * static_cast<std::size_t>(two_d);
    for (int a = 0; a < st.dim; ++a) {
      const double w = st.inv_h2[static_cast<std::size_t>(a)];
      // interior edges are owned by their lower endpoint
      if (nb[2 * a + 1] >= 0) {
        const double d = u[static_cast<std::size_t>(nb[2 * a + 1])] - u[i];
        acc[0] += w * d * d;
      } else {
        acc[0] += w * u[i] * u[i];
      }
      if (nb[2 * a] < 0) acc[0] += w * u[i] * u[i];
    }
  })[0];
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return blocked_sums<1>(a.size(), [&](std::size_t i, std::array<double, 1>& acc) {
    acc[0] += a[i] * b[i];
  })[0];
}

double abs_pow_sum(std::span<const double> u, const PowerLaw& p) {
  return blocked_sums<1>(u.size(), [&](std::size_t i, std::array<double, 1>& acc) {
    acc[0] += p(std::abs(u[i]));
  })[0];
}

void axpy(double alpha, std::span<const double> x, std::span<const double> y,
          std::span<double> out) {
  parallel_for(x.size(), [&](std::size_t i) { out[i] = alpha * x[i] + y[i]; });
}

void scale(double alpha, std::span<double> x) {
  parallel_for(x.size(), [&](std::size_t i) { x[i] *= alpha; });
}

void gradient_assemble(std::span<const double> lap_v, std::span<const double> u, double lambda,
                       const PowerLaw& q, std::span<double> out) {
  parallel_for(u.size(), [&](std::size_t i) {
    const double s = u[i];
    out[i] = lap_v[i] - lambda * s - q(std::abs(s)) * s;
  });
}

void hessian_assemble(std::span<const double> lap_h, std::span<const double> u,
                      std::span<const double> h, double lambda, double coef, const PowerLaw& q,
                      std::span<double> out) {
  parallel_for(u.size(), [&](std::size_t i) {
    out[i] = lap_h[i] - lambda * h[i] - coef * q(std::abs(u[i])) * h[i];
  });
}

FiberingSums fibering_sums(double t, std::span<const double> v, std::span<const double> shift,
                           const PowerLaw& q) {
  const auto s = blocked_sums<3>(v.size(), [&](std::size_t i, std::array<double, 3>& acc) {
    const double x = t * v[i] + shift[i];
    const double ax = std::abs(x);
    const double pq = q(ax);
    acc[0] += pq * ax * ax;
    acc[1] += pq * x * v[i];
    acc[2] += pq * v[i] * v[i];
  });
  return {s[0], s[1], s[2]};
}

}  // namespace bnp::kernels
