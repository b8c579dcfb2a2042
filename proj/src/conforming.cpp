// Lp norms of the piecewise-linear interpolant on the Kuhn subdivision.
//
// A cell with lower corner k is split into the N! simplices
//   k = x_0 -> x_0 + e_s(1) -> ... -> k + (1,...,1),   s a permutation,
// each of volume prod(h)/N!. For even integral p the integral of u^p over a
// simplex is |T| N! p!/(N+p)! h_p(u_0..u_N), h_p the complete homogeneous
// symmetric polynomial, and the derivative with respect to a vertex value u_j
// is |T| N! p!/(N+p)! h_{p-1}(u_0..u_N, u_j).

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "bnp/errors.hpp"
#include "bnp/grid.hpp"
#include "bnp/kernels.hpp"

namespace bnp {

SimplexRule grundmann_moller(int n, int s) {
  if (n < 1 || s < 0) throw ArgumentError("simplex rule needs n >= 1, s >= 0");
  SimplexRule rule;
  const int d = 2 * s + 1;
  auto factorial = [](int k) { return std::tgamma(k + 1.0); };
  std::vector<int> beta(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= s; ++i) {
    const double w = ((i % 2) ? -1.0 : 1.0) * std::pow(2.0, -2.0 * s) *
                     std::pow(static_cast<double>(d + n - 2 * i), d) / factorial(i) /
                     factorial(d + n - i);
    const int total = s - i;
    // all compositions of total into n+1 non-negative parts
    std::fill(beta.begin(), beta.end(), 0);
    beta[0] = total;
    while (true) {
      std::vector<double> pt(beta.size());
      for (std::size_t j = 0; j < beta.size(); ++j)
        pt[j] = (2.0 * beta[j] + 1.0) / (d + n - 2 * i);
      rule.points.push_back(std::move(pt));
      rule.weights.push_back(w);
      // next composition in reverse lexicographic order
      std::size_t j = 0;
      while (j < beta.size() - 1 && beta[j] == 0) ++j;
      if (j == beta.size() - 1) break;
      const int carry = beta[j] - 1;
      beta[j] = 0;
      beta[j + 1] += 1;
      beta[0] = carry;
    }
  }
  return rule;
}

namespace {

constexpr std::size_t kCellBlock = 4096;
constexpr int kRuleOrder = 1;  // degree 3 for non-even exponents

struct KuhnCells {
  int dim;
  int n;
  std::size_t cells = 1;                      // (n-1)^dim lower corners
  std::vector<std::size_t> stride;            // full grid
  std::vector<std::size_t> corner_offset;     // full-index offset of corner bits
  std::vector<std::vector<int>> paths;        // per simplex: N+1 corner bit masks
  std::span<const std::int32_t> map;

  explicit KuhnCells(const Domain& d)
      : dim(d.dim()), n(d.points_per_axis()), map(d.full_to_interior()) {
    const auto ud = static_cast<std::size_t>(dim);
    stride.assign(ud, 1);
    for (int a = dim - 2; a >= 0; --a)
      stride[static_cast<std::size_t>(a)] = stride[static_cast<std::size_t>(a) + 1] * static_cast<std::size_t>(n);
    for (int a = 0; a < dim; ++a) cells *= static_cast<std::size_t>(n - 1);
    corner_offset.assign(std::size_t{1} << ud, 0);
    for (std::size_t bits = 0; bits < corner_offset.size(); ++bits)
      for (std::size_t a = 0; a < ud; ++a)
        if (bits & (std::size_t{1} << a)) corner_offset[bits] += stride[a];
    std::vector<int> perm(ud);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> path(ud + 1, 0);
      for (std::size_t j = 0; j < ud; ++j) path[j + 1] = path[j] | (1 << perm[j]);
      paths.push_back(std::move(path));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  // full index of the lower corner of cell c
  std::size_t corner(std::size_t c) const {
    std::size_t f = 0;
    for (int a = dim - 1; a >= 0; --a) {
      const auto ua = static_cast<std::size_t>(a);
      f += (c % static_cast<std::size_t>(n - 1)) * stride[ua];
      c /= static_cast<std::size_t>(n - 1);
    }
    return f;
  }

  // vertex values of the cell at full index f; false if all vanish
  bool gather(std::size_t f, std::span<const double> u, double* vals) const {
    bool any = false;
    for (std::size_t bits = 0; bits < corner_offset.size(); ++bits) {
      const std::int32_t i = map[f + corner_offset[bits]];
      vals[bits] = i >= 0 ? u[static_cast<std::size_t>(i)] : 0.0;
      any = any || vals[bits] != 0.0;
    }
    return any;
  }
};

bool even_integral(double p) {
  const double r = std::round(p);
  return std::abs(p - r) < 1e-12 && static_cast<long>(r) % 2 == 0 && r >= 2.0 && r <= 64.0;
}

// h_k(x_0..x_m) for k = 0..deg, written to h[0..deg]
void complete_homogeneous(const double* x, int m, int deg, double* h) {
  h[0] = 1.0;
  for (int k = 1; k <= deg; ++k) h[k] = 0.0;
  for (int j = 0; j < m; ++j)
    for (int k = 1; k <= deg; ++k) h[k] += x[j] * h[k - 1];
}

}  // namespace

double conforming_lp_power(const Field& u, double p) {
  if (!(p >= 1.0)) throw ArgumentError("lp norm needs p >= 1");
  const Domain& d = *u.domain();
  const KuhnCells kc(d);
  const int dim = d.dim();
  const bool exact = even_integral(p);
  const int ip = static_cast<int>(std::lround(p));
  const SimplexRule rule = exact ? SimplexRule{} : grundmann_moller(dim, kRuleOrder);
  const auto vals_u = u.values();

  const std::size_t nb = (kc.cells + kCellBlock - 1) / kCellBlock;
  std::vector<double> partial(nb, 0.0);
  const auto nbl = static_cast<std::int64_t>(nb);
#pragma omp parallel for schedule(dynamic) if (kc.cells >= 2 * kCellBlock)
  for (std::int64_t b = 0; b < nbl; ++b) {
    std::vector<double> vals(kc.corner_offset.size()), x(static_cast<std::size_t>(dim) + 1),
        h(static_cast<std::size_t>(std::max(ip, 0)) + 1);
    double acc = 0.0;
    const std::size_t lo = static_cast<std::size_t>(b) * kCellBlock;
    const std::size_t hi = std::min(kc.cells, lo + kCellBlock);
    for (std::size_t c = lo; c < hi; ++c) {
      if (!kc.gather(kc.corner(c), vals_u, vals.data())) continue;
      for (const auto& path : kc.paths) {
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = vals[static_cast<std::size_t>(path[j])];
        if (exact) {
          complete_homogeneous(x.data(), dim + 1, ip, h.data());
          acc += h[static_cast<std::size_t>(ip)];
        } else {
          double s = 0.0;
          for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            double v = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) v += rule.points[q][j] * x[j];
            s += rule.weights[q] * std::pow(std::abs(v), p);
          }
          acc += s;
        }
      }
    }
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  // prod(h) = N! |T|
  if (exact) total *= std::exp(std::lgamma(ip + 1.0) - std::lgamma(dim + ip + 1.0));
  return d.weight() * total;
}

Field conforming_lp_power_gradient(const Field& u, double p) {
  if (!(p >= 1.0)) throw ArgumentError("lp norm needs p >= 1");
  const Domain& d = *u.domain();
  const KuhnCells kc(d);
  const int dim = d.dim();
  const bool exact = even_integral(p);
  const int ip = static_cast<int>(std::lround(p));
  const SimplexRule rule = exact ? SimplexRule{} : grundmann_moller(dim, kRuleOrder);
  const double scale = exact ? std::exp(std::lgamma(ip + 1.0) - std::lgamma(dim + ip + 1.0)) : 1.0;
  const auto vals_u = u.values();
  const auto map = kc.map;

  Field g(u.domain());
  auto out = g.values();
  // Cells whose lower corners share a parity pattern have disjoint vertex
  // sets, so each colour scatters without races and every node receives its
  // contributions in the same order for any thread count.
  const std::size_t colours = kc.corner_offset.size();
  const auto ncl = static_cast<std::int64_t>(kc.cells);
  for (std::size_t colour = 0; colour < colours; ++colour) {
#pragma omp parallel if (kc.cells >= 2 * kCellBlock)
    {
      std::vector<double> vals(colours), x(static_cast<std::size_t>(dim) + 1),
          h(static_cast<std::size_t>(std::max(ip, 1)) + 1), contrib(colours);
#pragma omp for schedule(static)
      for (std::int64_t cl = 0; cl < ncl; ++cl) {
        std::size_t c = static_cast<std::size_t>(cl), parity = 0;
        for (int a = dim - 1; a >= 0; --a) {
          parity |= ((c % static_cast<std::size_t>(kc.n - 1)) & 1u) << a;
          c /= static_cast<std::size_t>(kc.n - 1);
        }
        if (parity != colour) continue;
        const std::size_t f = kc.corner(static_cast<std::size_t>(cl));
        if (!kc.gather(f, vals_u, vals.data())) continue;
        std::fill(contrib.begin(), contrib.end(), 0.0);
        for (const auto& path : kc.paths) {
          for (std::size_t m = 0; m < x.size(); ++m) x[m] = vals[static_cast<std::size_t>(path[m])];
          if (exact) {
            complete_homogeneous(x.data(), dim + 1, ip - 1, h.data());
            for (std::size_t j = 0; j < x.size(); ++j) {
              // h_{p-1}(x, x_j) = sum_m x_j^m h_{p-1-m}(x)
              double pw = 1.0, s2 = 0.0;
              for (int m = 0; m < ip; ++m) {
                s2 += pw * h[static_cast<std::size_t>(ip - 1 - m)];
                pw *= x[j];
              }
              contrib[static_cast<std::size_t>(path[j])] += s2;
            }
          } else {
            for (std::size_t q = 0; q < rule.weights.size(); ++q) {
              double v = 0.0;
              for (std::size_t m = 0; m < x.size(); ++m) v += rule.points[q][m] * x[m];
              const double av = std::abs(v);
              if (av == 0.0) continue;
              const double dv = rule.weights[q] * p * std::pow(av, p - 2.0) * v;
              for (std::size_t j = 0; j < x.size(); ++j)
                contrib[static_cast<std::size_t>(path[j])] += dv * rule.points[q][j];
            }
          }
        }
        for (std::size_t bits = 0; bits < colours; ++bits) {
          const std::int32_t i = map[f + kc.corner_offset[bits]];
          if (i >= 0) out[static_cast<std::size_t>(i)] += scale * contrib[bits];
        }
      }
    }
  }
  return g;
}

}  // namespace bnp
