#include "bnp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "bnp/errors.hpp"

namespace bnp {

void Certificate::add(Check c) {
  overall = overall && c.passed;
  checks.push_back(std::move(c));
}

void Certificate::add_less(std::string name, double lhs, double rhs) {
  add({std::move(name), rhs - lhs > kStrictMargin, lhs, rhs, kStrictMargin});
}

void Certificate::add_equal(std::string name, double lhs, double rhs, double tol) {
  add({std::move(name), std::abs(lhs - rhs) <= tol, lhs, rhs, tol});
}

void Certificate::note(std::string name, double value) { quantities.emplace_back(std::move(name), value); }

const Check* Certificate::find(const std::string& prefix) const {
  for (const auto& c : checks)
    if (c.name.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

// ---- single records ------------------------------------------------------------------

Certificate certify_solution(const SolutionRecord& rec, const Params& p,
                             const std::optional<EnergyLevels>& levels) {
  Certificate cert;
  const Field& v = rec.v;
  const double res = residual_norm(v, p);
  cert.add({"residual: ||-Lap v - lambda u - u^{2*-1}||_2 < 1e-7 (1 + ||v||)",
            res < residual_tolerance(v), res, residual_tolerance(v), 0.0});

  const Field u = v + p.shift();
  const double umin = u.size() ? *std::min_element(u.values().begin(), u.values().end()) : 0.0;
  cert.add_less("positivity: 0 < min u", 0.0, umin);

  if (v.is_zero()) {
    cert.add({"class: v on N+ or N-", false, 0.0, 0.0, 0.0});
    return cert;
  }
  const NehariClass cls = classify(v, p);
  const bool on_manifold = cls.kind == NehariClass::Kind::Plus || cls.kind == NehariClass::Kind::Minus;
  cert.add({"class: v on N+ or N- (T''(1) != 0, |T'(1)| <= tol)", on_manifold, cls.t_second_deriv, 0.0,
            cls.tol_root});
  cert.note("T'(1)", cls.t_first_deriv);

  const double e = energy(v, p);
  const double e0 = energy(Field(p.domain()), p);
  cert.note("energy", e);
  cert.note("I(0)", e0);
  if (cls.kind == NehariClass::Kind::Plus) {
    const double tol = kStrictMargin * (1.0 + std::abs(e0));
    cert.add({"sign: m+ <= I(0)", e <= e0 + tol, e, e0, tol});
    cert.add_less("sign: I(0) < 0", e0, 0.0);
  } else if (cls.kind == NehariClass::Kind::Minus) {
    cert.add_less("sign: 0 < m-", 0.0, e);
  }

  if (levels && cls.kind == NehariClass::Kind::Minus) {
    const double q = energy_quantum(p);
    if (rec.seed == SeedKind::Minimax) {
      cert.add_less("window: m+ + S^{N/2}/N < c", levels->m_plus + q, e);
      if (levels->m_minus)
        cert.add_less("window: c < m- + S^{N/2}/N", e, *levels->m_minus + q);
    } else {
      cert.add_less("gap: m- < m+ + S^{N/2}/N", e, levels->m_plus + q);
    }
  }
  return cert;
}

// ---- nonexistence --------------------------------------------------------------------

Certificate nonexistence_certificate(const Params& p, const std::optional<Field>& candidate) {
  const SpectralData& sd = p.spectral();
  const double l1 = sd.lambda1();
  if (p.lambda() < l1)
    throw PreconditionError("nonexistence certificate needs lambda >= lambda1");
  const Field& e1 = sd.e1();
  Certificate cert;
  const double floor = p.lambda() * inner(p.shift(), e1);  // lambda mu int phi e1
  cert.note("lambda mu int phi e1", floor);

  if (!candidate) {
    cert.add_less("a-priori margin: 0 < lambda mu int phi e1", 0.0, floor);
    return cert;
  }
  const Field& v = *candidate;
  require_same_domain(v, e1);
  const double lap_pair = inner(apply_laplacian(v), e1);
  const double eig_pair = l1 * inner(v, e1);
  // e1 solves the discrete problem up to its residual, so the identity holds to
  // ||v||_2 * residual on top of rounding
  const double id_tol = kIdentityTolerance * (std::abs(lap_pair) + std::abs(eig_pair)) +
                        std::sqrt(l2_norm_sq(v)) * sd.eigen_residual();
  cert.add_equal("pairing identity: int (-Lap v) e1 = lambda1 int v e1", lap_pair, eig_pair, id_tol);

  const Field u = v + p.shift();
  const double ps = p.two_star();
  Field rhs_density(p.domain());
  for (std::size_t i = 0; i < u.size(); ++i)
    rhs_density[i] = p.lambda() * u[i] + std::pow(std::abs(u[i]), ps - 2.0) * u[i];
  const double source = inner(rhs_density, e1);
  const double margin = source - eig_pair;
  cert.note("int (lambda u + u^{2*-1}) e1", source);
  cert.note("margin", margin);

  const bool nonneg = std::all_of(v.values().begin(), v.values().end(), [](double x) { return x >= 0.0; });
  cert.note("candidate nonnegative", nonneg ? 1.0 : 0.0);
  if (floor == 0.0 && margin == 0.0) {
    // mu = 0 and v = 0: both sides vanish and nothing is decided
    cert.inconclusive = true;
    cert.add({"margin: int (lambda u + u^{2*-1}) e1 - lambda1 int v e1 >= lambda mu int phi e1 (inconclusive)",
              true, margin, floor, 0.0});
    return cert;
  }
  const double tol = kIdentityTolerance * (std::abs(source) + std::abs(eig_pair));
  cert.add({"margin: int (lambda u + u^{2*-1}) e1 - lambda1 int v e1 >= lambda mu int phi e1",
            margin >= floor - tol, margin, floor, tol});
  cert.add_less("contradiction: 0 < margin", 0.0, margin);
  return cert;
}

// ---- convexity ball ------------------------------------------------------------------

double convexity_radius(const Params& p) {
  const double l1 = p.spectral().lambda1();
  const double s = p.spectral().sobolev_S();
  const double q = p.two_star() - 2.0;
  const double num = 0.5 * (1.0 - p.lambda() / l1) * s;
  const double den = (p.two_star() - 1.0) * std::pow(2.0, q) * std::pow(s, q / 2.0);
  return std::pow(num / den, 1.0 / q);
}

namespace {

// a few Gaussian bumps of either sign centred at random interior nodes
Field smooth_sample(const DomainPtr& d, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> node(0, d->size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double diam = 0.0;
  for (int a = 0; a < d->dim(); ++a)
    diam = std::max(diam, d->axis_coordinate(a, d->points_per_axis() - 1) - d->axis_coordinate(a, 0));
  Field f(d);
  for (int k = 0; k < 4; ++k) {
    const auto c = d->coords(node(rng));
    const std::vector<double> centre(c.begin(), c.end());
    const double width = (0.05 + 0.3 * unit(rng)) * diam;
    const double amp = unit(rng) < 0.5 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto x = d->coords(i);
      double r2 = 0.0;
      for (std::size_t a = 0; a < centre.size(); ++a) r2 += (x[a] - centre[a]) * (x[a] - centre[a]);
      f[i] += amp * std::exp(-r2 / (2.0 * width * width));
    }
  }
  return f;
}

Field spike_sample(const DomainPtr& d, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> node(0, d->size() - 1);
  Field f(d);
  f[node(rng)] = 1.0;
  return f;
}

Field with_h1_norm(Field f, double r) {
  const double n = std::sqrt(h1_seminorm_sq(f));
  f *= r / n;
  return f;
}

}  // namespace

Certificate convexity_ball_check(const Params& p, int trials, std::uint64_t seed,
                                 const std::optional<Field>& vplus) {
  if (p.lambda() >= p.spectral().lambda1())
    throw PreconditionError("convexity ball needs lambda < lambda1");
  if (trials < 1) throw ArgumentError("convexity check needs at least one trial");
  Certificate cert;
  const double r = convexity_radius(p);
  cert.note("r_lambda", r);
  const DomainPtr& d = p.domain();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // the ground state is the natural concentration direction; fall back to e1
  Field ground = p.spectral().e1();
  try {
    ground = ground_state(p);
  } catch (const Error&) {
  }

  double min_ratio = std::numeric_limits<double>::infinity();
  int positive = 0;
  for (int t = 0; t < trials; ++t) {
    Field u = t % 3 == 0 ? smooth_sample(d, rng) : t % 3 == 1 ? spike_sample(d, rng) : ground;
    const double radius = r * (0.05 + 0.949 * unit(rng));
    u = with_h1_norm(std::move(u), radius);
    const double pick = unit(rng);
    Field h = pick < 0.4 ? smooth_sample(d, rng) : pick < 0.8 ? spike_sample(d, rng) : u;
    h = with_h1_norm(std::move(h), 1.0);
    const double form = inner(hessian_apply(u, h, p), h);
    if (form > 0.0) ++positive;
    min_ratio = std::min(min_ratio, form);
  }
  cert.note("positive forms", positive);
  cert.note("trials", trials);
  cert.add_less("convexity: 0 < min <I''(u) h, h> / ||h||^2 over ||u|| < r_lambda", 0.0, min_ratio);

  if (vplus) {
    const double n = std::sqrt(h1_seminorm_sq(*vplus));
    cert.add_less("inclusion: ||v+|| < r_lambda", n, r);
  }
  return cert;
}

// ---- thresholds ----------------------------------------------------------------------

Certificate threshold_report(const Params& p, const std::vector<SolutionRecord>& records) {
  std::optional<double> m_plus, m_minus;
  for (const auto& r : records) {
    if (r.nehari_class.kind == NehariClass::Kind::Plus)
      m_plus = m_plus ? std::min(*m_plus, r.energy) : r.energy;
    if (r.nehari_class.kind == NehariClass::Kind::Minus && r.seed != SeedKind::Minimax)
      m_minus = m_minus ? std::min(*m_minus, r.energy) : r.energy;
  }
  if (!m_plus || !m_minus)
    throw IncompleteInputError("threshold report needs an N+ record and an N- record");

  Certificate cert;
  const double q = energy_quantum(p);
  const double e0 = energy(Field(p.domain()), p);
  cert.note("m+", *m_plus);
  cert.note("m-", *m_minus);
  cert.note("S^{N/2}/N", q);
  cert.note("I(0)", e0);
  cert.note("window low m+ + S^{N/2}/N", *m_plus + q);
  cert.note("window high m- + S^{N/2}/N", *m_minus + q);

  const double tol = kStrictMargin * (1.0 + std::abs(e0));
  cert.add({"ordering: m+ <= I(0)", *m_plus <= e0 + tol, *m_plus, e0, tol});
  cert.add_less("ordering: I(0) < 0", e0, 0.0);
  cert.add_less("ordering: 0 < m-", 0.0, *m_minus);
  cert.add_less("gap: m- < m+ + S^{N/2}/N", *m_minus, *m_plus + q);

  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    const std::string tag = "record " + std::to_string(k) + " (" + to_string(r.seed) + ")";
    cert.note(tag + " energy - (m+ + S^{N/2}/N)", r.energy - (*m_plus + q));
    if (r.seed == SeedKind::Minimax) {
      cert.add_less("window: m+ + S^{N/2}/N < c, " + tag, *m_plus + q, r.energy);
      cert.add_less("window: c < m- + S^{N/2}/N, " + tag, r.energy, *m_minus + q);
    }
  }
  return cert;
}

// ---- output --------------------------------------------------------------------------

void to_json(nlohmann::json& j, const Check& c) {
  j = nlohmann::json{{"name", c.name}, {"passed", c.passed}, {"lhs", c.lhs}, {"rhs", c.rhs},
                     {"tolerance", c.tolerance}};
}

void to_json(nlohmann::json& j, const Certificate& c) {
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [k, v] : c.quantities) q[k] = v;
  j = nlohmann::json{{"overall", c.overall}, {"inconclusive", c.inconclusive}, {"checks", c.checks},
                     {"quantities", q}};
}

std::string format_table(const Certificate& c) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (const auto& k : c.checks)
    os << (k.passed ? "pass  " : "FAIL  ") << k.name << "\n      lhs " << k.lhs << "  rhs " << k.rhs
       << "  tol " << k.tolerance << '\n';
  for (const auto& [k, v] : c.quantities) os << "      " << k << " = " << v << '\n';
  os << (c.overall ? "overall: pass" : "overall: FAIL") << (c.inconclusive ? " (inconclusive)" : "") << '\n';
  return os.str();
}

}  // namespace bnp
