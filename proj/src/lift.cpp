#include "bnp/lift.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bnp/errors.hpp"
#include "bnp/linsolve.hpp"

namespace bnp {

BoundaryData BoundaryData::make_constant(double c) {
  BoundaryData g;
  g.kind = Kind::Constant;
  g.constant = c;
  return g;
}

BoundaryData BoundaryData::bump(std::vector<double> direction, double width, double amplitude) {
  BoundaryData g;
  g.kind = Kind::BumpOnBoundary;
  g.direction = std::move(direction);
  g.width = width;
  g.amplitude = amplitude;
  return g;
}

BoundaryData BoundaryData::node_table(std::vector<double> values) {
  BoundaryData g;
  g.kind = Kind::NodeTable;
  g.table = std::move(values);
  return g;
}

std::vector<double> BoundaryData::evaluate(const Domain& domain) const {
  const std::size_t nb = domain.boundary_size();
  std::vector<double> out(nb, 0.0);
  switch (kind) {
    case Kind::Constant:
      std::fill(out.begin(), out.end(), constant);
      break;
    case Kind::BumpOnBoundary: {
      if (direction.size() != static_cast<std::size_t>(domain.dim()))
        throw ArgumentError("bump direction must have one component per axis");
      double dn = 0.0;
      for (double c : direction) dn += c * c;
      dn = std::sqrt(dn);
      if (!(dn > 0.0)) throw ArgumentError("bump direction must be nonzero");
      if (!(width > 0.0)) throw ArgumentError("bump width must be positive");
      for (std::size_t b = 0; b < nb; ++b) {
        const auto x = domain.boundary_coords(b);
        double r = 0.0;
        for (double c : x) r += c * c;
        r = std::sqrt(r);
        double dist2 = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) {
          const double xa = r > 0.0 ? x[a] / r : 0.0;
          const double e = xa - direction[a] / dn;
          dist2 += e * e;
        }
        out[b] = amplitude * std::exp(-dist2 / (2.0 * width * width));
      }
      break;
    }
    case Kind::NodeTable:
      if (table.size() != nb)
        throw ArgumentError("boundary table has " + std::to_string(table.size()) +
                            " entries, domain has " + std::to_string(nb) + " boundary nodes");
      out = table;
      break;
  }
  bool nonzero = false;
  for (double v : out) {
    if (!std::isfinite(v)) throw AssumptionError("boundary data must be finite");
    if (v < 0.0) throw AssumptionError("boundary data violates g >= 0");
    nonzero = nonzero || v > 0.0;
  }
  if (!nonzero) throw AssumptionError("boundary data vanishes identically (g must not be 0)");
  return out;
}

std::vector<double> read_boundary_table(const std::string& path, std::size_t boundary_size) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open boundary table " + path);
  std::vector<double> values(boundary_size, 0.0);
  std::vector<char> seen(boundary_size, 0);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long idx;
    double v;
    if (!(ls >> idx)) continue;
    if (!(ls >> v)) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'index value'");
    if (idx < 0 || static_cast<std::size_t>(idx) >= boundary_size)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": boundary index out of range");
    values[static_cast<std::size_t>(idx)] = v;
    seen[static_cast<std::size_t>(idx)] = 1;
  }
  return values;
}

Field lift_rhs(const DomainPtr& domain, const std::vector<double>& g_values) {
  const auto& st = domain->stencil();
  Field b(domain);
  for (std::size_t i = 0; i < st.nodes; ++i) {
    double acc = 0.0;
    for (int a = 0; a < st.dim; ++a)
      for (int side = 0; side < 2; ++side) {
        const auto j = st.neighbor(i, a, side);
        if (j < 0) acc += st.inv_h2[static_cast<std::size_t>(a)] * g_values[static_cast<std::size_t>(-1 - j)];
      }
    b[i] = acc;
  }
  return b;
}

HarmonicLift solve_lift(const BoundaryData& g, const DomainPtr& domain) {
  HarmonicLift out;
  out.g = g;
  out.g_values = g.evaluate(*domain);
  out.g_max = *std::max_element(out.g_values.begin(), out.g_values.end());
  out.g_min = *std::min_element(out.g_values.begin(), out.g_values.end());

  const Field b = lift_rhs(domain, out.g_values);
  const auto* st = &domain->stencil();
  LinearOperator A = [st](std::span<const double> x, std::span<double> y) {
    kernels::laplacian(*st, x, y);
  };
  out.phi = Field(domain);
  // start from the mean boundary value; exact for constant data
  double mean = 0.0;
  for (double v : out.g_values) mean += v;
  mean /= static_cast<double>(out.g_values.size());
  for (std::size_t i = 0; i < out.phi.size(); ++i) out.phi[i] = mean;

  const double target = 1e-10 * out.g_max;
  Field Ap(domain);
  auto defect = [&] {
    kernels::laplacian(*st, out.phi.values(), Ap.values());
    double m = 0.0;
    for (std::size_t i = 0; i < Ap.size(); ++i) m = std::max(m, std::abs(Ap[i] - b[i]) / st->diag);
    return m;
  };
  out.residual = defect();
  for (int attempt = 0; attempt < 4 && out.residual >= target; ++attempt) {
    KrylovOptions ko;
    ko.rel_tol = 1e-14;
    ko.max_iterations = 50000;
    conjugate_gradient(A, b.values(), out.phi.values(), ko);
    out.residual = defect();
  }
  if (out.residual >= target)
    throw NumericalError("harmonic lift did not reach its residual target", out.residual);
  return out;
}

Field compose_solution(const Field& v, double mu, const HarmonicLift& lift) {
  require_same_domain(v, lift.phi);
  if (!(mu >= 0.0)) throw ArgumentError("mu must be nonnegative");
  Field u(v.domain());
  kernels::axpy(mu, lift.phi.values(), v.values(), u.values());
  return u;
}

}  // namespace bnp
