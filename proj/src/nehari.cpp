#include "bnp/nehari.hpp"

#include <cmath>
#include <limits>

#include "bnp/errors.hpp"

namespace bnp {

std::string to_string(NehariClass::Kind k) {
  switch (k) {
    case NehariClass::Kind::Plus: return "Plus";
    case NehariClass::Kind::Minus: return "Minus";
    case NehariClass::Kind::Zero: return "Zero";
    case NehariClass::Kind::NotOnManifold: return "NotOnManifold";
  }
  return "?";
}

NehariClass::Kind nehari_kind_from_string(const std::string& s) {
  if (s == "Plus") return NehariClass::Kind::Plus;
  if (s == "Minus") return NehariClass::Kind::Minus;
  if (s == "Zero") return NehariClass::Kind::Zero;
  if (s == "NotOnManifold") return NehariClass::Kind::NotOnManifold;
  throw ArgumentError("unknown Nehari class '" + s + "'");
}

std::string to_string(RaySet s) {
  switch (s) {
    case RaySet::AMinus: return "A_minus";
    case RaySet::APlus: return "A_plus";
    case RaySet::OnNMinus: return "OnNMinus";
  }
  return "?";
}

namespace {

// Newton on T' safeguarded by the sign bracket [lo, hi].
double polish_root(const FiberingProfile& prof, double lo, double hi, double tol,
                   std::vector<std::pair<double, double>>& history) {
  double flo = prof(lo).dT;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto f = prof(t);
    if (std::abs(f.dT) <= tol) return t;
    if ((f.dT < 0.0) == (flo < 0.0)) {
      lo = t;
      flo = f.dT;
    } else {
      hi = t;
    }
    history.emplace_back(lo, hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return 0.5 * (lo + hi);
    double next = f.d2T != 0.0 ? t - f.dT / f.d2T : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

}  // namespace

RayRoots find_roots(const Field& v, const Params& p) {
  const FiberingProfile prof(v, p);
  RayRoots out;
  out.pairing_sign = prof.pairing_sign();
  out.t0 = prof.t0();
  const double d_t0 = prof(out.t0).dT;
  if (!(d_t0 > 0.0)) throw AdmissibilityError("mu too large: T'(t0) <= 0", d_t0);
  out.tol_root = 1e-11 * (1.0 + std::abs(d_t0));

  double lo = out.t0, hi = 2.0 * out.t0;
  int doublings = 0;
  while (prof(hi).dT > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) throw NumericalError("no sign change of T' after 60 doublings of t0");
  }
  out.bracket_history.emplace_back(lo, hi);
  out.t_minus = polish_root(prof, lo, hi, out.tol_root, out.bracket_history);

  if (out.pairing_sign > 0.0) {
    if (!(prof(0.0).dT < 0.0))
      throw AdmissibilityError("mu too large: positive pairing without T'(0) < 0",
                               out.pairing_sign);
    out.bracket_history.emplace_back(0.0, out.t0);
    out.t_plus = polish_root(prof, 0.0, out.t0, out.tol_root, out.bracket_history);
  }
  return out;
}

NehariClass classify(const Field& v, const Params& p, double tol_root) {
  const FiberingProfile prof(v, p);
  const auto f = prof(1.0);
  NehariClass c;
  c.t_first_deriv = f.dT;
  c.t_second_deriv = f.d2T;
  c.tol_root = tol_root > 0.0 ? tol_root : 1e-8 * (1.0 + prof.h1_sq());
  c.tol_class = 1e-9 * prof.h1_sq();
  const double a = std::abs(f.dT);
  if (a > c.tol_root) {
    c.kind = NehariClass::Kind::NotOnManifold;
  } else if (f.d2T > c.tol_class) {
    c.kind = NehariClass::Kind::Plus;
  } else if (f.d2T < -c.tol_class) {
    c.kind = NehariClass::Kind::Minus;
  } else {
    // Zero is reported only when the root test is unambiguous
    c.kind = a <= 0.5 * c.tol_root ? NehariClass::Kind::Zero : NehariClass::Kind::NotOnManifold;
  }
  return c;
}

namespace {

void require_on_cone(const Field& v, const Params& p) {
  for (double x : v.values())
    if (x < 0.0) throw ArgumentError("reduced functional needs v >= 0");
  const double n = lp_norm(v, p.two_star());
  if (std::abs(n - 1.0) > 1e-10) throw ArgumentError("reduced functional needs ||v||_{2*} = 1");
}

}  // namespace

double reduced_J(const Field& v_unit, const Params& p) {
  require_on_cone(v_unit, p);
  const auto r = find_roots(v_unit, p);
  return energy(r.t_minus * v_unit, p);
}

Field reduced_J_gradient(const Field& v_unit, const Params& p) {
  const auto r = find_roots(v_unit, p);
  const double t = r.t_minus;
  const Field tv = t * v_unit;
  const Field g = gradient(tv, p);
  const FiberingProfile prof(v_unit, p);
  const auto f = prof(t);
  // d/dv J = t I'(tv) + T'(t) dt/dv, dt/dv = -(t I''(tv) v + I'(tv)) / T''(t)
  Field dt = t * hessian_apply(tv, v_unit, p) + g;
  dt *= -1.0 / f.d2T;
  Field out = t * g;
  kernels::axpy(f.dT, dt.values(), out.values(), out.values());
  return out;
}

std::vector<double> barycenter(const Field& v) {
  const Domain& d = *v.domain();
  const int dim = d.dim();
  const double ps = critical_exponent(dim);
  const kernels::PowerLaw pw(ps);
  std::vector<double> out(static_cast<std::size_t>(dim), 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = pw(std::abs(v[i]));
    mass += m;
    const auto x = d.coords(i);
    for (std::size_t a = 0; a < out.size(); ++a) out[a] += x[a] * m;
  }
  if (!(mass > 0.0)) throw ArgumentError("barycenter of the zero field");
  for (double& c : out) c /= mass;
  return out;
}

std::vector<double> gradient_direction_integral(const Field& v) {
  const Domain& d = *v.domain();
  const auto& st = d.stencil();
  std::vector<double> out(static_cast<std::size_t>(d.dim()), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double g2 = 0.0;
    for (int a = 0; a < st.dim; ++a) {
      const auto lo = st.neighbor(i, a, 0), hi = st.neighbor(i, a, 1);
      const double vl = lo >= 0 ? v[static_cast<std::size_t>(lo)] : 0.0;
      const double vh = hi >= 0 ? v[static_cast<std::size_t>(hi)] : 0.0;
      g2 += 0.5 * st.inv_h2[static_cast<std::size_t>(a)] * ((vh - v[i]) * (vh - v[i]) + (v[i] - vl) * (v[i] - vl));
    }
    const auto x = d.coords(i);
    double r = 0.0;
    for (double c : x) r += c * c;
    r = std::sqrt(r);
    if (r == 0.0) continue;
    for (std::size_t a = 0; a < out.size(); ++a) out[a] += d.weight() * g2 * x[a] / r;
  }
  return out;
}

RaySet ray_set_membership(const Field& u, const Params& p, double tol) {
  const double n = std::sqrt(h1_seminorm_sq(u));
  if (!(n > 0.0)) throw ArgumentError("ray set membership of the zero field");
  const auto r = find_roots((1.0 / n) * u, p);
  const double ratio = r.t_minus / n;
  if (std::abs(ratio - 1.0) <= tol) return RaySet::OnNMinus;
  return ratio < 1.0 ? RaySet::AMinus : RaySet::APlus;
}

AdmissibilityReport check_admissibility(const Params& p) {
  const DomainPtr& dom = p.domain();
  std::vector<Field> probes;
  probes.push_back(p.spectral().e1());
  probes.push_back(p.lift().phi);
  // compact bumps centred at a few interior nodes
  const std::size_t n = dom->size();
  for (std::size_t k = 1; k <= 3; ++k) {
    Field b(dom);
    const auto c = dom->coords(k * n / 4);
    const double rad = 4.0 * dom->min_h();
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = dom->coords(i);
      double r2 = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      const double s = 1.0 - r2 / (rad * rad);
      b[i] = s > 0.0 ? s * s : 0.0;
    }
    if (!b.is_zero()) probes.push_back(std::move(b));
  }
  AdmissibilityReport rep;
  rep.min_t0_numerator = std::numeric_limits<double>::infinity();
  rep.min_dT_at_t0 = std::numeric_limits<double>::infinity();
  for (const auto& v : probes) {
    const FiberingProfile prof(v, p);
    const double num = prof.t0_numerator() / prof.h1_sq();
    rep.min_t0_numerator = std::min(rep.min_t0_numerator, num);
    if (!(num > 0.0)) {
      rep.admissible = false;
      rep.reason = "t0 numerator nonpositive on a probe ray";
      continue;
    }
    const double d = prof(prof.t0()).dT;
    rep.min_dT_at_t0 = std::min(rep.min_dT_at_t0, d);
    if (!(d > 0.0)) {
      rep.admissible = false;
      rep.reason = "T'(t0) nonpositive on a probe ray";
    }
  }
  return rep;
}

}  // namespace bnp
