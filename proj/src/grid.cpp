#include "bnp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bnp/errors.hpp"
#include "bnp/linsolve.hpp"

namespace bnp {

// ---- DomainSpec ---------------------------------------------------------------

DomainSpec DomainSpec::box(int dim, std::vector<double> sides, int resolution) {
  DomainSpec s;
  s.shape = Shape::Box;
  s.dimension = dim;
  s.sides = std::move(sides);
  s.resolution = resolution;
  return s;
}

DomainSpec DomainSpec::cube(int dim, double side, int resolution) {
  return box(dim, std::vector<double>(static_cast<std::size_t>(std::max(dim, 0)), side),
             resolution);
}

DomainSpec DomainSpec::annulus(int dim, double delta0, int resolution) {
  DomainSpec s;
  s.shape = Shape::AnnulusD;
  s.dimension = dim;
  s.delta0 = delta0;
  s.resolution = resolution;
  return s;
}

void DomainSpec::validate() const {
  if (dimension < 3 || dimension > 5)
    throw ConfigError("dimension must be 3, 4 or 5 (got " + std::to_string(dimension) + ")");
  if (resolution < 4)
    throw ConfigError("resolution must be at least 4 points per axis (got " +
                      std::to_string(resolution) + ")");
  if (shape == Shape::Box) {
    if (sides.size() != static_cast<std::size_t>(dimension))
      throw ConfigError("box needs one side length per axis");
    for (double s : sides)
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("box sides must be positive");
  } else {
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw ConfigError("annulus delta0 must lie in (0, 1)");
  }
}

std::string to_string(const DomainSpec& spec) {
  std::ostringstream os;
  os << std::setprecision(17);
  if (spec.shape == Shape::Box) {
    os << "Box([";
    for (std::size_t a = 0; a < spec.sides.size(); ++a) os << (a ? "," : "") << spec.sides[a];
    os << "])";
  } else {
    os << "AnnulusD(delta0=" << spec.delta0 << ")";
  }
  os << ", N=" << spec.dimension << ", resolution " << spec.resolution;
  return os.str();
}

// ---- Domain -----------------------------------------------------------------------

double Domain::min_h() const { return *std::min_element(h_.begin(), h_.end()); }

double Domain::axis_coordinate(int axis, int k) const {
  return lower_[static_cast<std::size_t>(axis)] + k * h_[static_cast<std::size_t>(axis)];
}

std::shared_ptr<const Domain> Domain::build(const DomainSpec& spec) {
  spec.validate();
  auto d = std::shared_ptr<Domain>(new Domain());
  d->spec_ = spec;
  const int dim = spec.dimension;
  const int n = spec.resolution;
  d->n_ = n;
  const auto udim = static_cast<std::size_t>(dim);
  d->lower_.resize(udim);
  d->h_.resize(udim);
  if (spec.shape == Shape::Box) {
    for (std::size_t a = 0; a < udim; ++a) {
      d->lower_[a] = -0.5 * spec.sides[a];
      d->h_[a] = spec.sides[a] / (n - 1);
    }
  } else {
    // half-width chosen so the outermost layer sits one cell beyond 1/delta0
    const double half = (1.0 / spec.delta0) * (n - 1.0) / (n - 3.0);
    for (std::size_t a = 0; a < udim; ++a) {
      d->lower_[a] = -half;
      d->h_[a] = 2.0 * half / (n - 1);
    }
  }
  d->weight_ = 1.0;
  for (double h : d->h_) d->weight_ *= h;

  double full_d = std::pow(static_cast<double>(n), dim);
  if (full_d > 2.0e9) throw ConfigError("grid too large");
  const std::size_t full = static_cast<std::size_t>(std::llround(full_d));

  std::vector<std::size_t> stride(udim);
  stride[udim - 1] = 1;
  for (int a = dim - 2; a >= 0; --a)
    stride[static_cast<std::size_t>(a)] = stride[static_cast<std::size_t>(a) + 1] * static_cast<std::size_t>(n);

  auto multi_index = [&](std::size_t f, std::vector<int>& k) {
    for (int a = dim - 1; a >= 0; --a) {
      k[static_cast<std::size_t>(a)] = static_cast<int>(f % static_cast<std::size_t>(n));
      f /= static_cast<std::size_t>(n);
    }
  };

  const double r_in = spec.delta0, r_out = spec.shape == Shape::AnnulusD ? 1.0 / spec.delta0 : 0.0;
  const double rtol = 1e-12 * std::max(1.0, r_out);

  std::vector<char> inside(full, 0);
  std::vector<int> k(udim);
  for (std::size_t f = 0; f < full; ++f) {
    multi_index(f, k);
    bool in = true;
    for (int a = 0; a < dim && in; ++a) in = k[static_cast<std::size_t>(a)] >= 1 && k[static_cast<std::size_t>(a)] <= n - 2;
    if (in && spec.shape == Shape::AnnulusD) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double x = d->axis_coordinate(a, k[static_cast<std::size_t>(a)]);
        r2 += x * x;
      }
      const double r = std::sqrt(r2);
      in = r >= r_in - rtol && r <= r_out + rtol;
    }
    inside[f] = in ? 1 : 0;
  }

  d->full_to_interior_.assign(full, -1);
  std::vector<std::int32_t> full_to_boundary(full, -1);
  for (std::size_t f = 0; f < full; ++f) {
    if (inside[f]) {
      d->full_to_interior_[f] = static_cast<std::int32_t>(d->interior_full_.size());
      d->interior_full_.push_back(f);
    }
  }
  if (d->interior_full_.empty()) throw ConfigError("domain mask has no interior nodes");

  // exterior nodes touching the stencil of an interior node, row-major order
  for (std::size_t f = 0; f < full; ++f) {
    if (inside[f]) continue;
    multi_index(f, k);
    bool touches = false;
    for (int a = 0; a < dim && !touches; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      if (k[ua] > 0 && inside[f - stride[ua]]) touches = true;
      if (k[ua] < n - 1 && inside[f + stride[ua]]) touches = true;
    }
    if (touches) {
      full_to_boundary[f] = static_cast<std::int32_t>(d->boundary_full_.size());
      d->boundary_full_.push_back(f);
    }
  }

  const std::size_t ni = d->interior_full_.size();
  auto& st = d->stencil_;
  st.dim = dim;
  st.nodes = ni;
  st.neighbors.resize(ni * 2 * udim);
  st.inv_h2.resize(udim);
  st.diag = 0.0;
  for (std::size_t a = 0; a < udim; ++a) {
    st.inv_h2[a] = 1.0 / (d->h_[a] * d->h_[a]);
    st.diag += 2.0 * st.inv_h2[a];
  }
  d->coords_.resize(ni * udim);
  for (std::size_t i = 0; i < ni; ++i) {
    const std::size_t f = d->interior_full_[i];
    multi_index(f, k);
    for (std::size_t a = 0; a < udim; ++a) {
      d->coords_[i * udim + a] = d->axis_coordinate(static_cast<int>(a), k[a]);
      for (int side = 0; side < 2; ++side) {
        const std::size_t g = side == 0 ? f - stride[a] : f + stride[a];
        std::int32_t code;
        if (inside[g]) {
          code = d->full_to_interior_[g];
        } else {
          code = -1 - full_to_boundary[g];
        }
        st.neighbors[i * 2 * udim + 2 * a + static_cast<std::size_t>(side)] = code;
      }
    }
  }
  d->bcoords_.resize(d->boundary_full_.size() * udim);
  for (std::size_t b = 0; b < d->boundary_full_.size(); ++b) {
    multi_index(d->boundary_full_[b], k);
    for (std::size_t a = 0; a < udim; ++a)
      d->bcoords_[b * udim + a] = d->axis_coordinate(static_cast<int>(a), k[a]);
  }

  if (spec.shape == Shape::AnnulusD) {
    // interior nodes across the shell along the positive first axis
    const int c = (n - 1) / 2;
    int count = 0;
    for (int k0 = 0; k0 < n; ++k0) {
      if (d->axis_coordinate(0, k0) <= 0.0) continue;
      std::size_t f = static_cast<std::size_t>(k0) * stride[0];
      for (std::size_t a = 1; a < udim; ++a) f += static_cast<std::size_t>(c) * stride[a];
      if (inside[f]) ++count;
    }
    if (count < 3)
      throw ConfigError("resolution too coarse to represent the annulus shell (" +
                        std::to_string(count) + " interior nodes across it)");
  }
  return d;
}

// ---- Field -------------------------------------------------------------------------

Field::Field(DomainPtr domain) : domain_(std::move(domain)) {
  if (!domain_) throw ArgumentError("field needs a domain");
  values_.assign(domain_->size(), 0.0);
}

Field::Field(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (!domain_) throw ArgumentError("field needs a domain");
  if (values_.size() != domain_->size())
    throw ArgumentError("field length " + std::to_string(values_.size()) +
                        " does not match the domain's " + std::to_string(domain_->size()) +
                        " interior nodes");
}

void require_same_domain(const Field& a, const Field& b) {
  if (!a.domain() || a.domain() != b.domain()) throw ArgumentError("fields live on different domains");
}

Field& Field::operator+=(const Field& o) {
  require_same_domain(*this, o);
  kernels::axpy(1.0, o.values_, values_, values_);
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_domain(*this, o);
  kernels::axpy(-1.0, o.values_, values_, values_);
  return *this;
}

Field& Field::operator*=(double s) {
  kernels::scale(s, values_);
  return *this;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

bool Field::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double inner(const Field& a, const Field& b) {
  require_same_domain(a, b);
  return a.domain()->weight() * kernels::dot(a.values(), b.values());
}

Field apply_laplacian(const Field& u) {
  Field out(u.domain());
  kernels::laplacian(u.domain()->stencil(), u.values(), out.values());
  return out;
}

double critical_exponent(int dim) { return 2.0 * dim / (dim - 2.0); }

double h1_seminorm_sq(const Field& u) {
  return u.domain()->weight() * kernels::edge_energy(u.domain()->stencil(), u.values());
}

double l2_norm_sq(const Field& u) { return u.domain()->weight() * kernels::dot(u.values(), u.values()); }

double lp_power(const Field& u, double p) {
  if (!(p >= 1.0)) throw ArgumentError("lp norm needs p >= 1");
  return u.domain()->weight() * kernels::abs_pow_sum(u.values(), kernels::PowerLaw(p));
}

double lp_norm(const Field& u, double p) { return std::pow(lp_power(u, p), 1.0 / p); }

Norms norms(const Field& u, double p) { return {h1_seminorm_sq(u), l2_norm_sq(u), lp_norm(u, p)}; }

double sobolev_quotient(const Field& u) {
  const double ps = critical_exponent(u.domain()->dim());
  const double lp = std::pow(conforming_lp_power(u, ps), 1.0 / ps);
  if (lp == 0.0) throw ArgumentError("Sobolev quotient of the zero field");
  return h1_seminorm_sq(u) / (lp * lp);
}

// ---- spectral constants -------------------------------------------------------------

namespace {

LinearOperator shifted_laplacian(const Domain& d, double shift) {
  const auto* st = &d.stencil();
  return [st, shift](std::span<const double> x, std::span<double> y) {
    kernels::laplacian(*st, x, y);
    if (shift != 0.0) kernels::axpy(-shift, x, y, y);
  };
}

}  // namespace

Eigenpair principal_eigenpair(const DomainPtr& domain, double tol, int max_iterations) {
  Field x(domain);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0;
  x *= 1.0 / std::sqrt(l2_norm_sq(x));

  Eigenpair out;
  double shift = 0.0;
  double rq = inner(apply_laplacian(x), x);
  Field y(domain);
  for (int it = 1; it <= max_iterations; ++it) {
    const auto op = shifted_laplacian(*domain, shift);
    // warm start: y ~ x / (rq - shift)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] / std::max(rq - shift, 1e-300);
    KrylovOptions ko;
    ko.rel_tol = 1e-14;
    ko.max_iterations = 20 * static_cast<int>(std::sqrt(static_cast<double>(x.size()))) + 2000;
    conjugate_gradient(op, x.values(), y.values(), ko);
    x = y;
    x *= 1.0 / std::sqrt(l2_norm_sq(x));
    const Field ax = apply_laplacian(x);
    rq = inner(ax, x);
    Field r = ax;
    kernels::axpy(-rq, x.values(), ax.values(), r.values());
    out.residual = std::sqrt(l2_norm_sq(r));
    out.iterations = it;
    if (out.residual < tol * rq) {
      out.lambda1 = rq;
      double s = 0.0;
      for (double v : x.values()) s += v;
      if (s < 0.0) x *= -1.0;
      out.e1 = std::move(x);
      return out;
    }
    // once the Rayleigh quotient is accurate it is a safe SPD shift
    if (out.residual < 1e-2 * rq) shift = 0.9 * rq;
  }
  throw NumericalError("principal eigenpair did not converge: residual " +
                           std::to_string(out.residual),
                       out.residual);
}

SobolevEstimate estimate_sobolev_S(const DomainPtr& domain, double tol, int max_iterations) {
  const Domain& d = *domain;
  const int dim = d.dim();
  const double p = critical_exponent(dim);
  auto normalize = [p](Field& v) { v *= 1.0 / std::pow(conforming_lp_power(v, p), 1.0 / p); };

  std::vector<double> center(static_cast<std::size_t>(dim), 0.0);
  double radius;
  if (d.spec().shape == Shape::Box) {
    radius = 0.45 * *std::min_element(d.spec().sides.begin(), d.spec().sides.end());
  } else {
    const double a = d.spec().delta0, b = 1.0 / d.spec().delta0;
    center[0] = 0.5 * (a + b);
    radius = 0.45 * (b - a);
  }
  Field u(domain);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto x = d.coords(i);
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)]) *
                                        (x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)]);
    const double s = 1.0 - r2 / (radius * radius);
    u[i] = s > 0.0 ? s * s : 0.0;
  }
  if (u.is_zero())
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0;
  normalize(u);
  double Q = h1_seminorm_sq(u);

  SobolevEstimate out;
  const auto op = shifted_laplacian(d, 0.0);
  Field rhs(domain), y(domain);
  out.stagnated = true;
  for (int it = 1; it <= max_iterations; ++it) {
    // subgradient of the 1-homogeneous norm at ||I_h u||_p = 1
    rhs = conforming_lp_power_gradient(u, p);
    rhs *= 1.0 / p;
    for (std::size_t i = 0; i < u.size(); ++i) y[i] = u[i] / Q;
    KrylovOptions ko;
    ko.rel_tol = 1e-11;
    ko.max_iterations = 20000;
    conjugate_gradient(op, rhs.values(), y.values(), ko);
    Field next = y;
    normalize(next);
    const double Qn = h1_seminorm_sq(next);
    out.iterations = it;
    if (!(Qn <= Q)) {
      // only inexact inner solves can break monotonicity; keep the best iterate
      out.stagnated = (Qn - Q) > 1e-12 * Q;
      break;
    }
    const double rel = (Q - Qn) / Q;
    u = std::move(next);
    Q = Qn;
    if (rel < tol) {
      out.stagnated = false;
      break;
    }
  }
  out.value = Q;
  out.minimizer = std::move(u);
  return out;
}

SpectralData::SpectralData(DomainPtr domain, Eigenpair eig, SobolevEstimate sob)
    : domain_(std::move(domain)),
      lambda1_(eig.lambda1),
      e1_(std::move(eig.e1)),
      eigen_residual_(eig.residual),
      sobolev_(std::move(sob)),
      sobolev_S_(sobolev_.value) {}

std::shared_ptr<SpectralData> SpectralData::compute(const DomainPtr& domain) {
  auto eig = principal_eigenpair(domain);
  auto sob = estimate_sobolev_S(domain);
  return std::make_shared<SpectralData>(domain, std::move(eig), std::move(sob));
}

std::optional<Field> SpectralData::cached_ground_state(double lambda) const {
  std::lock_guard lock(cache_mutex_);
  auto it = ground_states_.find(lambda);
  if (it == ground_states_.end()) return std::nullopt;
  return it->second;
}

void SpectralData::store_ground_state(double lambda, Field u) const {
  std::lock_guard lock(cache_mutex_);
  ground_states_.insert_or_assign(lambda, std::move(u));
}

// ---- dumps -----------------------------------------------------------------------------

void write_field(std::ostream& os, const Field& u) {
  const Domain& d = *u.domain();
  os << d.dim();
  for (int a = 0; a < d.dim(); ++a) os << ' ' << d.points_per_axis();
  os << '\n';
  os << std::setprecision(17);
  const auto map = d.full_to_interior();
  for (std::size_t f = 0; f < map.size(); ++f) {
    const double v = map[f] >= 0 ? u[static_cast<std::size_t>(map[f])] : 0.0;
    os << v << '\n';
  }
}

void write_field(const std::string& path, const Field& u) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write field file " + path);
  write_field(os, u);
}

Field read_field(std::istream& is, const DomainPtr& domain) {
  const Domain& d = *domain;
  int dim = 0;
  if (!(is >> dim) || dim != d.dim())
    throw ConfigError("field header dimension does not match the domain");
  for (int a = 0; a < dim; ++a) {
    int n = 0;
    if (!(is >> n) || n != d.points_per_axis())
      throw ConfigError("field header sizes do not match the domain");
  }
  Field u(domain);
  const auto map = d.full_to_interior();
  for (std::size_t f = 0; f < map.size(); ++f) {
    double v;
    if (!(is >> v)) throw ConfigError("field file truncated at node " + std::to_string(f));
    if (map[f] >= 0) u[static_cast<std::size_t>(map[f])] = v;
  }
  if (!u.all_finite()) throw ConfigError("field file contains non-finite values");
  return u;
}

Field read_field(const std::string& path, const DomainPtr& domain) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open field file " + path);
  return read_field(is, domain);
}

}  // namespace bnp
