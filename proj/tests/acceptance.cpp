// Acceptance run: one PASS/FAIL line per criterion, followed by the numbers
// behind it. --expect-red=<list> names criteria whose FAIL is known and
// analysed; the exit status is 0 when exactly those criteria fail.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bnp/errors.hpp"
#include "bnp/sweep.hpp"
#include "support.hpp"

using namespace bnp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;
};

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

RunConfig make_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "acceptance");
}

Field noisy_bump(const DomainPtr& d, std::mt19937_64& rng, double amp) {
  return amp * test::smooth_bump(d) + test::random_field(d, rng, -0.1 * amp, 0.1 * amp);
}

double h1_dist(const Field& a, const Field& b) { return std::sqrt(h1_seminorm_sq(a - b)); }

// ---- 1 -------------------------------------------------------------------------------

Outcome discretization() {
  Outcome o;
  const double exact = 3.0 * M_PI * M_PI;
  std::vector<double> err;
  double worst_res = 0.0;
  for (int n : {9, 17, 33}) {
    const auto e = principal_eigenpair(Domain::build(DomainSpec::cube(3, 1.0, n)));
    err.push_back(std::abs(e.lambda1 - exact));
    worst_res = std::max(worst_res, e.residual);
    o.details.push_back(fmt("n=%d lambda1=%.10f error=%.3e residual=%.2e", n, e.lambda1, err.back(), e.residual));
  }
  const double order1 = std::log2(err[0] / err[1]), order2 = std::log2(err[1] / err[2]);
  o.details.push_back(fmt("observed orders %.4f, %.4f", order1, order2));
  o.pass = std::min(order1, order2) >= 1.9 && worst_res < 1e-10;
  return o;
}

// ---- 2 -------------------------------------------------------------------------------

Outcome calculus() {
  Outcome o;
  const auto& s = test::cube(13);
  std::mt19937_64 rng(2024);
  double worst_g = 0.0, worst_h = 0.0, worst_sbp = 0.0;
  const double l1 = s.spectral->lambda1();
  const std::vector<std::pair<double, double>> cells{{0.0, 0.0}, {0.0, 0.01}, {0.5 * l1, 0.0}, {0.5 * l1, 0.01}};
  for (int k = 0; k < 50; ++k) {
    const auto [lambda, mu] = cells[static_cast<std::size_t>(k) % cells.size()];
    const Params p = s.params(lambda, mu);
    const Field v = noisy_bump(s.domain, rng, 0.5), h = test::random_field(s.domain, rng);
    const double eps = 1e-5;
    const double fd = (energy(v + eps * h, p) - energy(v - eps * h, p)) / (2 * eps);
    const double an = inner(gradient(v, p), h);
    worst_g = std::max(worst_g, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    const Field w = test::random_field(s.domain, rng);
    const double fdh = inner(gradient(v + eps * h, p) - gradient(v - eps * h, p), w) / (2 * eps);
    const double anh = inner(hessian_apply(v, h, p), w);
    worst_h = std::max(worst_h, std::abs(fdh - anh) / std::max(1.0, std::abs(anh)));
    const double auv = inner(apply_laplacian(h), w), uaw = inner(h, apply_laplacian(w));
    worst_sbp = std::max(worst_sbp, std::abs(auv - uaw) / std::abs(auv));
  }
  o.details.push_back(fmt("worst relative errors: gradient %.2e, hessian %.2e, summation by parts %.2e", worst_g,
                          worst_h, worst_sbp));
  o.pass = worst_g < 1e-6 && worst_h < 1e-5 && worst_sbp < 1e-12;
  return o;
}

// ---- 3 -------------------------------------------------------------------------------

// Dense scan of T' from t = 0 with bisection of every sign change.
std::vector<double> scan_roots(const FiberingProfile& prof, int samples) {
  double t_max = 1.0;
  while (!(prof(t_max).dT < 0.0 && prof(t_max).d2T < 0.0)) t_max *= 2.0;
  std::vector<double> roots;
  double prev_t = 0.0, prev = prof(0.0).dT;
  for (int k = 1; k <= samples; ++k) {
    const double t = t_max * k / samples;
    const double cur = prof(t).dT;
    if ((prev < 0.0) != (cur < 0.0)) {
      double lo = prev_t, hi = t;
      const bool rising = prev < 0.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((prof(mid).dT < 0.0) == rising ? lo : hi) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev = cur;
  }
  return roots;
}

Outcome fibering_oracle() {
  Outcome o;
  const auto& s = test::cube(9);
  const double l1 = s.spectral->lambda1();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int rays = 0, rejected = 0, count_mismatch = 0, order_fail = 0, zero_class = 0, closed_checked = 0;
  double worst_loc = 0.0, worst_closed = 0.0;
  while (rays < 200) {
    const bool mu_zero = rays % 5 == 0;
    const double lambda = 0.9 * l1 * unit(rng);
    const double mu = mu_zero ? 0.0 : 0.05 * unit(rng);
    const Params p = s.params(lambda, mu);
    Field v = rays % 2 == 0 ? test::smooth_bump(s.domain) + test::random_field(s.domain, rng, 0.0, 0.5)
                            : test::random_field(s.domain, rng);
    v *= 1.0 / std::sqrt(h1_seminorm_sq(v));
    RayRoots r;
    try {
      r = find_roots(v, p);
    } catch (const AdmissibilityError&) {
      ++rejected;
      continue;
    }
    ++rays;
    const FiberingProfile prof(v, p);
    const auto oracle = scan_roots(prof, 100000);
    std::vector<double> found;
    if (r.t_plus) found.push_back(*r.t_plus);
    found.push_back(r.t_minus);
    if (oracle.size() != found.size()) {
      ++count_mismatch;
      continue;
    }
    for (std::size_t k = 0; k < found.size(); ++k)
      worst_loc = std::max(worst_loc, std::abs(found[k] - oracle[k]) / oracle[k]);
    if (r.pairing_sign > 0.0 && !(r.t_plus && 0.0 < *r.t_plus && *r.t_plus < r.t0 && r.t0 < r.t_minus))
      ++order_fail;
    for (double t : found)
      if (classify(t * v, p).kind == NehariClass::Kind::Zero) ++zero_class;
    if (mu_zero) {
      const double q = p.two_star();
      const double closed = std::pow((prof.h1_sq() - lambda * prof.l2_sq()) / prof.lp_pow(), 1.0 / (q - 2));
      worst_closed = std::max(worst_closed, std::abs(r.t_minus - closed) / closed);
      ++closed_checked;
    }
  }
  o.details.push_back(fmt("%d rays (%d inadmissible draws redrawn), root-count mismatches %d", rays, rejected,
                          count_mismatch));
  o.details.push_back(fmt("worst relative root distance to the scan %.2e", worst_loc));
  o.details.push_back(fmt("mu = 0 closed form on %d rays, worst relative error %.2e", closed_checked, worst_closed));
  o.details.push_back(fmt("ordering failures %d, Zero classifications %d", order_fail, zero_class));
  o.pass = count_mismatch == 0 && worst_loc < 1e-6 && worst_closed < 1e-10 && order_fail == 0 && zero_class == 0;
  return o;
}

// ---- 4, 5, 6 ----------------------------------------------------------------------------

struct BoxCell {
  Params p;
  SolutionRecord plus, minus;
  double plus_seconds = 0.0, minus_seconds = 0.0;
};

const BoxCell& box_cell() {
  static const BoxCell cell = [] {
    const auto& s = test::cube(33);
    const Params p = s.params_rel(0.5, 0.01);
    auto t0 = std::chrono::steady_clock::now();
    auto plus = minimize_on_Nplus(p, zero_relax_seed(p));
    auto t1 = std::chrono::steady_clock::now();
    auto minus = minimize_on_Nminus(p, ground_state(p));
    auto t2 = std::chrono::steady_clock::now();
    return BoxCell{p, std::move(plus), std::move(minus), std::chrono::duration<double>(t1 - t0).count(),
                   std::chrono::duration<double>(t2 - t1).count()};
  }();
  return cell;
}

Outcome two_solutions() {
  Outcome o;
  const auto& c = box_cell();
  bool ok = true;
  for (const auto* r : {&c.plus, &c.minus}) {
    const double tol = residual_tolerance(r->v);
    const double min_u = *std::min_element(r->u.values().begin(), r->u.values().end());
    o.details.push_back(fmt("%s: converged %d, residual %.2e < %.2e, min u %.3e, energy %.10f",
                            to_string(r->nehari_class.kind).c_str(), r->converged, r->grad_norm, tol, min_u,
                            r->energy));
    ok = ok && r->converged && r->grad_norm < tol && min_u > 0.0;
  }
  ok = ok && c.plus.nehari_class.kind == NehariClass::Kind::Plus &&
       c.minus.nehari_class.kind == NehariClass::Kind::Minus;
  const double i0 = energy(Field(c.p.domain()), c.p);
  o.details.push_back(fmt("m+ %.6e <= I(0) %.6e < 0 < m- %.6f", c.plus.energy, i0, c.minus.energy));
  o.details.push_back(fmt("solver time %.1f s", c.plus_seconds + c.minus_seconds));
  o.pass = ok && c.plus.energy <= i0 && i0 < 0.0 && c.minus.energy > 0.0 && c.plus_seconds + c.minus_seconds < 120.0;
  return o;
}

Outcome energy_gap() {
  Outcome o;
  const auto& c = box_cell();
  const double quantum = energy_quantum(c.p);
  const double margin = c.plus.energy + quantum - c.minus.energy;
  o.details.push_back(fmt("m- - m+ = %.6f, S^{N/2}/N = %.6f (S = %.6f), margin %.6f", c.minus.energy - c.plus.energy,
                          quantum, c.p.spectral().sobolev_S(), margin));
  o.pass = margin > 1e-6;
  return o;
}

Outcome uniqueness_probe() {
  Outcome o;
  const auto& c = box_cell();
  const auto other = minimize_on_Nplus(c.p, 0.01 * c.p.spectral().e1());
  const double dist = h1_dist(other.v, c.plus.v);
  const double r = convexity_radius(c.p);
  const double norm = std::sqrt(h1_seminorm_sq(c.plus.v));
  const auto ball = convexity_ball_check(c.p, 200, 6, c.plus.v);
  const Check* conv = ball.find("convexity:");
  o.details.push_back(fmt("zero-relax and e1 seeds: H1 distance %.2e", dist));
  o.details.push_back(fmt("||v+|| = %.4e < r_lambda = %.4e", norm, r));
  o.details.push_back(fmt("200 forms in the ball, minimum normalised value %.4e", conv ? conv->rhs : -1.0));
  o.pass = accepted(other) && dist < 1e-6 && norm < r && ball.overall;
  return o;
}

// ---- 7 -------------------------------------------------------------------------------

Outcome nonexistence() {
  Outcome o;
  const RunConfig cfg = make_config(
      "[domain]\nshape = box\ndimension = 3\nresolution = 17\n[parameters]\nlambda_rel = 1, 1.5\nmu = 0.01\n"
      "[search]\nsearches = nplus, nminus\n");
  const RunContext ctx = build_context(cfg);
  bool ok = true;
  int sign_changing_converged = 0;
  for (double lam : cfg.absolute_lambdas(ctx.spectral->lambda1())) {
    const CellResult cell = run_cell(ctx, cfg, lam, cfg.mus.front());
    const bool cert = cell.nonexistence && cell.nonexistence->overall;
    o.details.push_back(fmt("lambda/lambda1 = %.2f: status %s, certificate %s, certified records %d",
                            lam / ctx.spectral->lambda1(), cell.status.c_str(), cert ? "pass" : "FAIL",
                            cell.certified()));
    if (cell.nonexistence)
      for (const auto& ch : cell.nonexistence->checks)
        if (ch.name.rfind("margin", 0) == 0 || ch.name.find(", margin") != std::string::npos)
          o.details.push_back(fmt("  %s: %.6e >= %.6e", ch.name.substr(0, 60).c_str(), ch.lhs, ch.rhs));
    for (const auto& n : cell.notes) {
      o.details.push_back("  " + n);
      if (n.find("converged") != std::string::npos && n.find("not converged") == std::string::npos &&
          n.find("changes sign") != std::string::npos)
        ++sign_changing_converged;
    }
    ok = ok && cell.status == "nonexistence" && cert && cell.certified() == 0;
  }
  if (sign_changing_converged > 0)
    o.details.push_back(fmt("note: %d solver runs reached the residual tolerance on sign-changing fields; "
                            "positivity rejects them",
                            sign_changing_converged));
  o.pass = ok;
  return o;
}

// ---- 8 -------------------------------------------------------------------------------

double angle(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += a[i] * b[i], aa += a[i] * a[i], bb += b[i] * b[i];
  return std::acos(std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0));
}

Outcome annulus_multiplicity() {
  Outcome o;
  const RunConfig cfg = make_config(
      "[domain]\nshape = annulus\ndimension = 3\ndelta0 = 0.45\nresolution = 33\n[parameters]\n"
      "lambda_rel = 0.1\nmu = 0.005\n[search]\nsearches = nplus, nminus, multistart, minimax\nepsilons = 0.2\n"
      "directions = 6\n");
  const RunContext ctx = build_context(cfg);
  const CellResult cell = run_cell(ctx, cfg, cfg.absolute_lambdas(ctx.spectral->lambda1()).front(), cfg.mus.front());
  o.details.push_back(fmt("status %s, %zu distinct records, %d certified", cell.status.c_str(), cell.records.size(),
                          cell.certified()));
  std::vector<const SolutionRecord*> bubble;
  bool all_certified = true;
  for (const auto& cr : cell.records) {
    all_certified = all_certified && cr.certificate.overall;
    const auto& r = cr.record;
    o.details.push_back(fmt("  %s seed, class %s, energy %.6f, certified %d, barycenter (%.3f, %.3f, %.3f)",
                            to_string(r.seed).c_str(), to_string(r.nehari_class.kind).c_str(), r.energy,
                            cr.certificate.overall, r.barycenter[0], r.barycenter[1], r.barycenter[2]));
    if (r.seed == SeedKind::Bubble && r.nehari_class.kind == NehariClass::Kind::Minus && cr.certificate.overall)
      bubble.push_back(&r);
  }
  double best_angle = 0.0, min_dist = 1e300;
  bool pair_found = false;
  for (std::size_t i = 0; i < bubble.size(); ++i)
    for (std::size_t j = i + 1; j < bubble.size(); ++j) {
      const double d = h1_dist(bubble[i]->v, bubble[j]->v);
      const double a = angle(bubble[i]->barycenter, bubble[j]->barycenter);
      min_dist = std::min(min_dist, d);
      best_angle = std::max(best_angle, a);
      pair_found = pair_found || (d > 1e-3 && a > M_PI / 2);
    }
  o.details.push_back(fmt("%zu certified bubble-seeded N- records, min pairwise H1 distance %.3e, widest angle %.3f",
                          bubble.size(), bubble.size() > 1 ? min_dist : 0.0, best_angle));
  if (cell.minimax)
    o.details.push_back(fmt("minimax: %s (family sup %.4f, window (%.4f, %.4f))%s%s",
                            cell.minimax->record ? "found" : "not found", cell.minimax->family_sup,
                            cell.minimax->window_low, cell.minimax->window_high,
                            cell.minimax->reason.empty() ? "" : ": ", cell.minimax->reason.c_str()));
  o.pass = cell.status == "solved" && pair_found && all_certified && cell.minimax.has_value();
  return o;
}

// ---- 9 -------------------------------------------------------------------------------

Outcome mu_star_boundary() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "bnp_acceptance_mu_star";
  std::vector<std::string> tables;
  bool ok = true;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = base / std::to_string(run);
    fs::remove_all(dir);
    const RunConfig cfg = make_config(
        "[domain]\nshape = box\ndimension = 3\nresolution = 17\n[parameters]\nlambda_rel = 0.25, 0.5, 0.75\n"
        "mu = 0.01\n[search]\nsearches = mu_star\n[output]\ndirectory = " + dir.string() + "\n");
    const RunContext ctx = build_context(cfg);
    const RunResult res = run_sweep(ctx, cfg);
    write_run(res, ctx, cfg);
    std::ifstream a(dir / "mu_star.csv"), b(dir / "branches.csv");
    std::stringstream ss;
    ss << a.rdbuf() << b.rdbuf();
    tables.push_back(ss.str());
    if (run > 0) continue;
    for (const auto& row : res.boundary) {
      const bool has = row.result.has_value();
      const double ms = has ? row.result->mu_star : 0.0;
      const bool certified = std::all_of(row.plus_certified.begin(), row.plus_certified.end(), [](bool x) { return x; });
      o.details.push_back(fmt("lambda/lambda1 = %.2f: mu* >= %.6g, %zu branch points, all certified %d, solves %d%s%s",
                              row.lambda / res.lambda1, ms, row.plus_certified.size(), certified,
                              has ? row.result->solves : 0, row.error.empty() ? "" : ", error: ", row.error.c_str()));
      ok = ok && has && std::isfinite(ms) && ms > 0.0 && certified && !row.plus_certified.empty();
    }
  }
  const bool same = tables[0] == tables[1];
  o.details.push_back(std::string("rerun byte-identical: ") + (same ? "yes" : "no"));
  o.pass = ok && same;
  return o;
}

// ---- 10 ------------------------------------------------------------------------------

Outcome bubble_sanity() {
  Outcome o;
  const auto s = test::make_setup(DomainSpec::annulus(3, 0.45, 49));
  const Params p = s.params_rel(0.1, 0.005);
  const double target = std::pow(s.spectral->sobolev_S(), 1.5);
  const std::vector<double> dir{1.0, 0.0, 0.0};
  std::vector<double> mass;
  for (double eps : {0.4, 0.2, 0.1}) {
    const auto b = make_bubble(eps, dir, s.domain, 0.45);
    mass.push_back(conforming_lp_power(b.field, 6.0));
    o.details.push_back(fmt("eps %.1f: ||U||_{2*}^{2*} = %.4f (lumped %.4f), S^{N/2} = %.4f", eps, mass.back(),
                            lp_power(b.field, 6.0), target));
  }
  const bool trend = mass[0] < mass[1] && mass[1] < mass[2] && mass[2] < target;

  const auto vplus = minimize_on_Nplus(p, zero_relax_seed(p));
  const double threshold = vplus.energy + energy_quantum(p);
  const Field U = make_bubble(0.1, dir, s.domain, 0.45).field;
  // affine path v+ + tU runs from A+ (t = 0) into A-; the crossing lies on N-
  auto outer = [&](double t) { return find_roots(vplus.v + t * U, p).t_minus - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (outer(hi) > 0.0) lo = hi, hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (outer(mid) > 0.0 ? lo : hi) = mid;
  }
  const double t_cross = 0.5 * (lo + hi);
  const Field crossing = vplus.v + t_cross * U;
  const double e_cross = energy(crossing, p);
  double sup = -1e300;
  for (int k = 0; k <= 400; ++k) sup = std::max(sup, energy(vplus.v + (2.0 * hi * k / 400) * U, p));
  const double quotient = sobolev_quotient(U);
  o.details.push_back(fmt("trend %s", trend ? "increasing and below S^{N/2}" : "violated"));
  o.details.push_back(fmt("v+ accepted %d, m+ = %.6e, threshold m+ + S^{N/2}/N = %.6f", accepted(vplus), vplus.energy,
                          threshold));
  o.details.push_back(fmt("N- crossing at t = %.4f: energy %.6f, class %s; sup of I along the path %.6f", t_cross,
                          e_cross, to_string(classify(crossing, p).kind).c_str(), sup));
  o.details.push_back(fmt("cut-off bubble quotient ||U||^2/||U||_{2*}^2 = %.4f against S = %.4f", quotient,
                          s.spectral->sobolev_S()));
  o.pass = trend && accepted(vplus) && e_cross < threshold;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_red;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto parse_list = [](const std::string& list, std::set<int>& out) {
      std::stringstream ss(list);
      std::string item;
      while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
    };
    if (a.rfind("--expect-red=", 0) == 0) parse_list(a.substr(13), expect_red);
    else if (a.rfind("--only=", 0) == 0) parse_list(a.substr(7), only);
    else {
      std::cerr << "usage: acceptance [--only=1,2,...] [--expect-red=10,...]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"discretization oracle: lambda1 -> 3 pi^2 with order >= 1.9", discretization},
      {"calculus consistency on 50 pairs", calculus},
      {"fibering roots against a 1e5-sample scan on 200 rays", fibering_oracle},
      {"two solutions on the box: m+ <= I(0) < 0 < m-", two_solutions},
      {"energy gap: m- < m+ + S^{N/2}/N", energy_gap},
      {"N+ uniqueness probe and convexity ball", uniqueness_probe},
      {"nonexistence for lambda >= lambda1", nonexistence},
      {"multiplicity on the annulus", annulus_multiplicity},
      {"mu* boundary and determinism", mu_star_boundary},
      {"bubble trend and sublevel seed", bubble_sanity},
  };
  std::set<int> failed;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) failed.insert(id);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[k].first
              << fmt(" (%.1f s)", secs) << (o.pass || !expect_red.count(id) ? "" : " [known red]") << '\n';
    for (const auto& d : o.details) std::cout << "      " << d << '\n';
    std::cout.flush();
  }
  std::set<int> expected;
  for (int id : expect_red)
    if (only.empty() || only.count(id)) expected.insert(id);
  if (failed != expected) {
    std::cout << "acceptance: failing set differs from the expected red set\n";
    return 1;
  }
  return 0;
}
