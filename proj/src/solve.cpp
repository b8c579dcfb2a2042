#include "bnp/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnp/errors.hpp"
#include "bnp/linsolve.hpp"

namespace bnp {

std::string to_string(SeedKind k) {
  switch (k) {
    case SeedKind::ZeroRelax: return "ZeroRelax";
    case SeedKind::GroundStateRay: return "GroundStateRay";
    case SeedKind::Bubble: return "Bubble";
    case SeedKind::Minimax: return "Minimax";
  }
  return "?";
}

SeedKind seed_kind_from_string(const std::string& s) {
  if (s == "ZeroRelax") return SeedKind::ZeroRelax;
  if (s == "GroundStateRay") return SeedKind::GroundStateRay;
  if (s == "Bubble") return SeedKind::Bubble;
  if (s == "Minimax") return SeedKind::Minimax;
  throw ArgumentError("unknown seed kind '" + s + "'");
}

double energy_quantum(const Params& p) {
  const int n = p.dim();
  return std::pow(p.spectral().sobolev_S(), n / 2.0) / n;
}

double residual_tolerance(const Field& v) { return 1e-7 * (1.0 + std::sqrt(h1_seminorm_sq(v))); }

Field inverse_laplacian(const Field& r, double rel_tol) {
  const auto* st = &r.domain()->stencil();
  const LinearOperator op = [st](std::span<const double> x, std::span<double> y) {
    kernels::laplacian(*st, x, y);
  };
  Field y(r.domain());
  KrylovOptions ko;
  ko.rel_tol = rel_tol;
  ko.max_iterations = 50000;
  const auto res = conjugate_gradient(op, r.values(), y.values(), ko);
  if (!res.converged && res.residual > 1e3 * rel_tol * std::sqrt(kernels::dot(r.values(), r.values())))
    throw NumericalError("Poisson solve did not converge", res.residual);
  return y;
}

Field zero_relax_seed(const Params& p) {
  Field g = gradient(Field(p.domain()), p);
  g *= -1.0;
  return inverse_laplacian(g);
}

SolutionRecord make_record(const Field& v, const Params& p, SeedKind seed) {
  SolutionRecord r;
  r.lambda = p.lambda();
  r.mu = p.mu();
  r.v = v;
  r.u = v + p.shift();
  r.energy = energy(v, p);
  r.grad_norm = residual_norm(v, p);
  r.positive = std::all_of(r.u.values().begin(), r.u.values().end(), [](double x) { return x > 0.0; });
  r.seed = seed;
  if (!v.is_zero()) {
    r.nehari_class = classify(v, p);
    r.barycenter = barycenter(v);
    r.gradient_direction = gradient_direction_integral(v);
  }
  return r;
}

bool accepted(const SolutionRecord& r) {
  const auto k = r.nehari_class.kind;
  return r.converged && r.positive &&
         (k == NehariClass::Kind::Plus || k == NehariClass::Kind::Minus) &&
         r.grad_norm < residual_tolerance(r.v);
}

bool newton_polish(Field& v, const Params& p, bool definite, const SolverOptions& opts,
                   int& iterations) {
  const int maxit = opts.max_newton_iterations * std::max(1, opts.budget_factor);
  Field g = gradient(v, p);
  double r = std::sqrt(l2_norm_sq(g));
  for (int it = 0; it < maxit; ++it) {
    const double target = opts.newton_tol * (1.0 + std::abs(energy(v, p)));
    if (r <= target) return true;
    const Field vv = v;
    const Field u = v + p.shift();
    const auto* st = &p.domain()->stencil();
    const double lam = p.lambda(), c = p.two_star() - 1.0;
    const auto& pw = p.power();
    const LinearOperator H = [&, st](std::span<const double> x, std::span<double> y) {
      kernels::laplacian(*st, x, y);
      kernels::hessian_assemble(y, u.values(), x, lam, c, pw, y);
    };
    Field rhs = g;
    rhs *= -1.0;
    Field step(p.domain());
    KrylovOptions ko;
    ko.rel_tol = 1e-11;
    ko.max_iterations = opts.max_krylov_iterations * std::max(1, opts.budget_factor);
    bool solved = false;
    if (definite) {
      const auto res = conjugate_gradient(H, rhs.values(), step.values(), ko);
      solved = !res.negative_curvature;
      if (!solved) std::fill(step.values().begin(), step.values().end(), 0.0);
    }
    if (!solved) minres(H, rhs.values(), step.values(), ko);
    ++iterations;

    // damped step on the residual norm
    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k) {
      Field trial = vv;
      kernels::axpy(alpha, step.values(), trial.values(), trial.values());
      Field gt = gradient(trial, p);
      const double rt = std::sqrt(l2_norm_sq(gt));
      if (std::isfinite(rt) && rt < (1.0 - 1e-4 * alpha) * r) {
        v = std::move(trial);
        g = std::move(gt);
        r = rt;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return r <= opts.newton_tol * (1.0 + std::abs(energy(v, p)));
  }
  return r <= opts.newton_tol * (1.0 + std::abs(energy(v, p)));
}

namespace {

bool has_negative(const Field& v) {
  return std::any_of(v.values().begin(), v.values().end(), [](double x) { return x < 0.0; });
}

Field abs_field(Field v) {
  for (double& x : v.values()) x = std::abs(x);
  return v;
}

// Rescale a ray onto N+; nullopt when the ray has no t+.
std::optional<Field> project_plus(Field w, const Params& p) {
  if (has_negative(w)) w = abs_field(std::move(w));
  if (w.is_zero()) return std::nullopt;
  const auto roots = find_roots(w, p);
  if (!roots.t_plus) return std::nullopt;
  w *= *roots.t_plus;
  return w;
}

Field normalize_cone(Field w, double ps) {
  if (has_negative(w)) w = abs_field(std::move(w));
  const double n = lp_norm(w, ps);
  if (!(n > 0.0)) throw ArgumentError("cone normalisation of the zero field");
  w *= 1.0 / n;
  return w;
}

struct ConePoint {
  Field w;
  double t = 0.0;
  double J = 0.0;
};

ConePoint cone_point(Field w, const Params& p) {
  ConePoint c;
  c.w = std::move(w);
  const auto roots = find_roots(c.w, p);
  c.t = roots.t_minus;
  c.J = energy(c.t * c.w, p);
  return c;
}

// Armijo descent of J on the cone, preconditioned by the inverse Laplacian.
ConePoint descend_J(ConePoint cur, const Params& p, const SolverOptions& opts, int max_steps,
                    int& iterations) {
  const double ps = p.two_star();
  double alpha = 1.0 / (cur.t * cur.t);
  for (int it = 0; it < max_steps; ++it) {
    const Field g = cur.t * gradient(cur.t * cur.w, p);
    const Field d = inverse_laplacian(g);
    const double s = inner(g, d);
    if (!(s > 0.0) || std::sqrt(s) / cur.t <= opts.descent_tol * (1.0 + std::abs(cur.J))) break;
    bool accepted_step = false;
    for (int k = 0; k < 40; ++k) {
      Field trial = cur.w;
      kernels::axpy(-alpha, d.values(), trial.values(), trial.values());
      try {
        ConePoint next = cone_point(normalize_cone(std::move(trial), ps), p);
        if (next.J <= cur.J - 1e-4 * alpha * s) {
          cur = std::move(next);
          accepted_step = true;
          break;
        }
      } catch (const AdmissibilityError&) {
      } catch (const ArgumentError&) {
      }
      alpha *= 0.5;
    }
    ++iterations;
    if (!accepted_step) break;
    alpha *= 2.0;
  }
  return cur;
}

}  // namespace

SolutionRecord minimize_on_Nplus(const Params& p, const Field& seed, const SolverOptions& opts,
                                 SeedKind kind) {
  if (p.mu() == 0.0) throw PreconditionError("the N+ branch is empty at mu = 0");
  require_same_domain(seed, p.shift());
  if (seed.is_zero()) throw ArgumentError("degenerate seed: zero field");
  auto start = project_plus(seed, p);
  if (!start) throw ArgumentError("degenerate seed: the pairing is nonpositive on its ray");
  Field v = std::move(*start);
  double E = energy(v, p);
  int iterations = 0;
  double alpha = 1.0;
  const int maxit = opts.max_descent_iterations * std::max(1, opts.budget_factor);
  for (int it = 0; it < maxit; ++it) {
    const Field g = gradient(v, p);
    const Field d = inverse_laplacian(g);
    const double s = inner(g, d);
    if (!(s > 0.0) || std::sqrt(s) <= opts.descent_tol * (1.0 + std::abs(E))) break;
    bool moved = false;
    for (int k = 0; k < 40; ++k) {
      Field trial = v;
      kernels::axpy(-alpha, d.values(), trial.values(), trial.values());
      std::optional<Field> next;
      try {
        next = project_plus(std::move(trial), p);
      } catch (const AdmissibilityError&) {
      }
      if (next) {
        const double En = energy(*next, p);
        if (En <= E - 1e-4 * alpha * s) {
          v = std::move(*next);
          E = En;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    ++iterations;
    if (!moved) break;
    alpha = std::min(2.0 * alpha, 1.0);
  }
  const bool ok = newton_polish(v, p, true, opts, iterations);
  auto rec = make_record(v, p, kind);
  rec.iterations = iterations;
  rec.converged = ok;
  if (!ok) rec.note = "Newton polish did not reach tolerance";
  return rec;
}

SolutionRecord minimize_on_Nminus(const Params& p, const Field& seed, const SolverOptions& opts,
                                  SeedKind kind) {
  require_same_domain(seed, p.shift());
  if (seed.is_zero()) throw ArgumentError("degenerate seed: zero field");
  ConePoint cur = cone_point(normalize_cone(seed, p.two_star()), p);
  int iterations = 0;
  const int maxit = opts.max_descent_iterations * std::max(1, opts.budget_factor);
  cur = descend_J(std::move(cur), p, opts, maxit, iterations);
  Field v = cur.t * cur.w;
  const bool ok = newton_polish(v, p, false, opts, iterations);
  auto rec = make_record(v, p, kind);
  rec.iterations = iterations;
  rec.converged = ok;
  if (!ok) rec.note = "Newton polish did not reach tolerance";
  return rec;
}

Field ground_state(const Params& p, const SolverOptions& opts) {
  if (auto cached = p.spectral().cached_ground_state(p.lambda())) return *cached;
  const Params p0 = p.with_mu(0.0);
  auto rec = minimize_on_Nminus(p0, p.spectral().e1(), opts, SeedKind::GroundStateRay);
  if (!accepted(rec))
    throw NumericalError("ground state of the mu = 0 problem did not converge", rec.grad_norm);
  p.spectral().store_ground_state(p.lambda(), rec.v);
  return rec.v;
}

// ---- bubbles -------------------------------------------------------------------------

namespace {

// C^2 ramp from 0 at s = 0 to 1 at s = 1
double smooth_ramp(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double annular_cutoff(double r, double d0) {
  if (r <= d0 || r >= 1.0 / d0) return 0.0;
  if (r < 2.0 * d0) return smooth_ramp((r - d0) / d0);
  if (r > 0.5 / d0) return smooth_ramp((1.0 / d0 - r) / (0.5 / d0));
  return 1.0;
}

}  // namespace

BubbleSeed make_bubble(double epsilon, const std::vector<double>& direction, const DomainPtr& domain,
                       double delta0) {
  const Domain& d = *domain;
  if (d.spec().shape != Shape::AnnulusD)
    throw ArgumentError("bubble seeds need an annular domain");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("bubble epsilon must lie in (0, 1)");
  if (direction.size() != static_cast<std::size_t>(d.dim()))
    throw ArgumentError("bubble direction has the wrong dimension");
  double n2 = 0.0;
  for (double c : direction) n2 += c * c;
  if (std::abs(n2 - 1.0) > 1e-12) throw ArgumentError("bubble direction must be a unit vector");
  if (!(delta0 >= d.spec().delta0 && delta0 < 0.5))
    throw ArgumentError("bubble cutoff radius must lie in [domain delta0, 1/2)");

  const int dim = d.dim();
  const double e2 = epsilon * epsilon;
  const double amp = std::pow(dim * (dim - 2.0) * e2, (dim - 2.0) / 4.0);
  BubbleSeed b;
  b.epsilon = epsilon;
  b.direction = direction;
  b.delta0 = delta0;
  b.field = Field(domain);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.coords(i);
    double r2 = 0.0, dist2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      r2 += x[a] * x[a];
      const double c = x[a] - (1.0 - epsilon) * direction[a];
      dist2 += c * c;
    }
    const double cut = annular_cutoff(std::sqrt(r2), delta0);
    b.field[i] = cut > 0.0 ? cut * amp / std::pow(e2 + dist2, (dim - 2.0) / 2.0) : 0.0;
  }
  return b;
}

std::vector<std::vector<double>> coordinate_directions(int dim) {
  std::vector<std::vector<double>> out;
  for (int a = 0; a < dim; ++a)
    for (double s : {1.0, -1.0}) {
      std::vector<double> y(static_cast<std::size_t>(dim), 0.0);
      y[static_cast<std::size_t>(a)] = s;
      out.push_back(std::move(y));
    }
  return out;
}

namespace {

double h1_distance(const Field& a, const Field& b) { return std::sqrt(h1_seminorm_sq(a - b)); }

}  // namespace

MultistartResult multistart_Nminus(const Params& p, const SolutionRecord& vplus,
                                   const std::vector<std::vector<double>>& directions,
                                   double epsilon, const SolverOptions& opts) {
  MultistartResult out;
  out.threshold = vplus.energy + energy_quantum(p);
  const double d0 = p.domain()->spec().delta0;
  bool any_seed = false;
  for (const auto& y : directions) {
    MultistartAttempt at;
    at.direction = y;
    try {
      const auto bubble = make_bubble(epsilon, y, p.domain(), d0);
      const Field ray = vplus.v + bubble.field;
      const auto roots = find_roots(ray, p);
      const Field seed = roots.t_minus * ray;
      at.seed_energy = energy(seed, p);
      at.seed_below_threshold = at.seed_energy < out.threshold;
      any_seed = true;
      auto rec = minimize_on_Nminus(p, seed, opts, SeedKind::Bubble);
      rec.seed_direction = y;
      at.converged = accepted(rec);
      at.energy = rec.energy;
      if (at.converged) {
        const bool dup = std::any_of(out.records.begin(), out.records.end(), [&](const SolutionRecord& o) {
          return h1_distance(o.v, rec.v) < 1e-4;
        });
        if (!dup) out.records.push_back(std::move(rec));
      }
    } catch (const Error& e) {
      at.error = e.what();
    }
    out.attempts.push_back(std::move(at));
  }
  if (!any_seed) throw NumericalError("no bubble seed admits an N- projection");
  return out;
}

// ---- minimax -------------------------------------------------------------------------

namespace {

// u(x) -> u(-x) on a grid symmetric about the origin
Field point_reflection(const Field& u) {
  const Domain& d = *u.domain();
  const auto full = d.interior_to_full();
  const auto map = d.full_to_interior();
  const std::size_t nfull = map.size();
  Field out(u.domain());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const std::int32_t j = map[nfull - 1 - full[i]];
    if (j < 0) throw NumericalError("domain mask is not symmetric under x -> -x");
    out[static_cast<std::size_t>(j)] = u[i];
  }
  return out;
}

}  // namespace

MinimaxResult minimax_gamma(const Params& p, double epsilon, double m_plus, double m_minus,
                            const std::vector<SolutionRecord>& known, const SolverOptions& opts) {
  if (p.domain()->spec().shape != Shape::AnnulusD)
    throw ArgumentError("minimax search needs an annular domain");
  MinimaxResult out;
  const double q = energy_quantum(p);
  out.window_low = m_plus + q;
  out.window_high = m_minus + q;
  const double ps = p.two_star();
  const double d0 = p.domain()->spec().delta0;
  const int dim = p.dim();
  const auto dirs = coordinate_directions(dim);

  std::vector<Field> bubbles;
  for (const auto& y : dirs) bubbles.push_back(make_bubble(epsilon, y, p.domain(), d0).field);

  // pinned boundary members at (1-eps) y
  for (const auto& b : bubbles)
    out.boundary_level = std::max(out.boundary_level, cone_point(normalize_cone(b, ps), p).J);

  // interior lattice: the centre and one midpoint per direction
  struct Member {
    ConePoint point;
    bool centre = false;
  };
  std::vector<Member> family;
  {
    // an antipodal pair: zero barycentre, two concentration points
    Field c = bubbles[0] + bubbles[1];
    family.push_back({cone_point(normalize_cone(std::move(c), ps), p), true});
  }
  for (std::size_t k = 0; k < bubbles.size(); ++k) {
    const std::size_t anti = k ^ 1u;
    Field m = 3.0 * bubbles[k] + bubbles[anti];
    family.push_back({cone_point(normalize_cone(m, ps), p), false});
  }

  // descend the current argmax; the centre keeps x -> -x symmetry, hence zero barycentre
  const int sweeps = 6 * std::max(1, opts.budget_factor);
  const int steps = std::max(5, opts.max_descent_iterations / 20);
  int iterations = 0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    auto it = std::max_element(family.begin(), family.end(),
                               [](const Member& a, const Member& b) { return a.point.J < b.point.J; });
    const double before = it->point.J;
    it->point = descend_J(std::move(it->point), p, opts, steps, iterations);
    if (it->centre) {
      Field s = it->point.w + point_reflection(it->point.w);
      it->point = cone_point(normalize_cone(std::move(s), ps), p);
    }
    ++out.relaxation_sweeps;
    if (!(it->point.J < before - 1e-10 * std::abs(before))) break;
  }
  auto top = std::max_element(family.begin(), family.end(),
                              [](const Member& a, const Member& b) { return a.point.J < b.point.J; });
  out.family_sup = top->point.J;

  Field v = top->point.t * top->point.w;
  const bool ok = newton_polish(v, p, false, opts, iterations);
  auto rec = make_record(v, p, SeedKind::Minimax);
  rec.iterations = iterations;
  rec.converged = ok;
  if (!accepted(rec)) {
    out.reason = "polished maximiser not certified (converged=" + std::string(ok ? "yes" : "no") +
                 ", class=" + to_string(rec.nehari_class.kind) + ")";
    return out;
  }
  if (rec.nehari_class.kind != NehariClass::Kind::Minus) {
    out.reason = "polished maximiser is not on N-";
    return out;
  }
  if (!(rec.energy > out.window_low && rec.energy < out.window_high)) {
    out.reason = "energy " + std::to_string(rec.energy) + " outside the window (" +
                 std::to_string(out.window_low) + ", " + std::to_string(out.window_high) + ")";
    return out;
  }
  for (const auto& k : known)
    if (h1_distance(k.v, rec.v) <= 1e-4) {
      out.reason = "polished maximiser coincides with a known solution";
      return out;
    }
  out.record = std::move(rec);
  return out;
}

// ---- continuation in mu ----------------------------------------------------------------

MuStarResult estimate_mu_star(const Params& base, double lambda, const ContinuationOptions& copts,
                              const SolverOptions& opts) {
  const double lambda1 = base.spectral().lambda1();
  if (!(lambda > 0.0 && lambda < lambda1))
    throw PreconditionError("mu* continuation needs 0 < lambda < lambda1");
  MuStarResult out;
  out.lambda = lambda;

  std::optional<Field> prev_plus, prev_minus;
  double last_mu = 0.0;
  double step = copts.step_start;
  double mu = copts.mu_start;
  int small_halvings = 0;

  auto try_plus = [&](const Params& p) -> std::optional<SolutionRecord> {
    std::vector<Field> seeds;
    if (prev_plus) seeds.push_back((p.mu() / last_mu) * *prev_plus);
    seeds.push_back(zero_relax_seed(p));
    for (const auto& s : seeds) {
      if (out.solves >= copts.max_solves) break;
      try {
        auto rec = minimize_on_Nplus(p, s, opts, SeedKind::ZeroRelax);
        ++out.solves;
        if (accepted(rec) && rec.nehari_class.kind == NehariClass::Kind::Plus) return rec;
      } catch (const Error&) {
        ++out.solves;
      }
      // plain Newton from the seed, no projection
      try {
        Field v = s;
        int its = 0;
        const bool ok = newton_polish(v, p, true, opts, its);
        auto rec = make_record(v, p, SeedKind::ZeroRelax);
        rec.converged = ok;
        rec.iterations = its;
        if (accepted(rec) && rec.nehari_class.kind == NehariClass::Kind::Plus) return rec;
      } catch (const Error&) {
      }
    }
    return std::nullopt;
  };

  while (out.solves < copts.max_solves) {
    const Params p = base.with_lambda(lambda).with_mu(mu);
    auto plus = try_plus(p);
    if (plus) {
      BranchPoint bp;
      bp.mu = mu;
      bp.energy_plus = plus->energy;
      bp.converged_plus = plus->converged;
      bp.accepted_plus = true;
      if (copts.track_minus) {
        try {
          const Field seed = prev_minus ? *prev_minus : ground_state(p, opts);
          auto rec = minimize_on_Nminus(p, seed, opts, SeedKind::GroundStateRay);
          bp.energy_minus = rec.energy;
          bp.converged_minus = accepted(rec) && rec.nehari_class.kind == NehariClass::Kind::Minus;
          if (bp.converged_minus) prev_minus = rec.v;
        } catch (const Error&) {
          bp.converged_minus = false;
        }
      }
      out.branch.push_back(bp);
      prev_plus = plus->v;
      if (copts.keep_records) out.plus_records.push_back(std::move(*plus));
      last_mu = mu;
      small_halvings = 0;
      step *= 2.0;
    } else {
      if (last_mu == 0.0) {
        // not even the starting value works: retreat towards 0
        mu *= 0.5;
        step = mu;
        if (mu < 1e-12) break;
        continue;
      }
      step *= 0.5;
      if (step < copts.min_step_rel * last_mu && ++small_halvings >= 3) break;
    }
    mu = last_mu + step;
  }
  out.mu_star = last_mu;
  return out;
}

}  // namespace bnp
