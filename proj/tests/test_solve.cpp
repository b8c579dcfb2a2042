#include <doctest.h>

#include "bnp/errors.hpp"
#include "bnp/solve.hpp"
#include "support.hpp"

using namespace bnp;

namespace {

double rel_diff(const Field& a, const Field& b) {
  return std::sqrt(h1_seminorm_sq(a - b) / h1_seminorm_sq(b));
}

// Lumped Sobolev quotient ||u||^2 / ||u||_{2*}^2
double lumped_quotient(const Field& u) {
  const double q = critical_exponent(u.domain()->dim());
  return h1_seminorm_sq(u) / std::pow(lp_power(u, q), 2.0 / q);
}

// Fixed-point iteration u <- A^{-1}(u^{2*-1}), renormalised; converges to a
// positive solution of -Lap u = u^{2*-1} from a positive symmetric start.
Field quotient_oracle(const DomainPtr& d) {
  const double q = critical_exponent(d->dim());
  Field u = test::smooth_bump(d);
  for (int it = 0; it < 500; ++it) {
    Field r(d);
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::pow(u[i], q - 1);
    Field next = inverse_laplacian(r, 1e-13);
    next *= 1.0 / lp_norm(next, q);
    const double change = rel_diff(next, u);
    u = std::move(next);
    if (change < 1e-12) break;
  }
  return u;
}

}  // namespace

TEST_SUITE("solve") {
  TEST_CASE("both Nehari minimisers on the box are accepted") {
    const auto& s = test::cube(17);
    const Params p = s.params_rel(0.5, 0.01);
    const auto plus = minimize_on_Nplus(p, zero_relax_seed(p));
    REQUIRE(accepted(plus));
    CHECK(plus.nehari_class.kind == NehariClass::Kind::Plus);
    CHECK(plus.energy < 0.0);
    const auto minus = minimize_on_Nminus(p, ground_state(p));
    REQUIRE(accepted(minus));
    CHECK(minus.nehari_class.kind == NehariClass::Kind::Minus);
    CHECK(minus.energy > 0.0);
    CHECK(minus.energy < plus.energy + energy_quantum(p));

    // restarting from a converged solution returns it; the comparison runs at
    // a Newton target well below the 1e-10 reproduction tolerance
    SolverOptions tight;
    tight.newton_tol = 1e-12;
    const auto ref = minimize_on_Nplus(p, plus.v, tight);
    REQUIRE(accepted(ref));
    const auto again = minimize_on_Nplus(p, ref.v, tight);
    CHECK(rel_diff(again.v, ref.v) < 1e-10);
    CHECK(rel_diff(ref.v, plus.v) < 1e-8);
    const auto ref_minus = minimize_on_Nminus(p, minus.v, tight);
    REQUIRE(accepted(ref_minus));
    const auto again_minus = minimize_on_Nminus(p, ref_minus.v, tight);
    CHECK(rel_diff(again_minus.v, ref_minus.v) < 1e-10);
  }

  TEST_CASE("ground state energy equals the quotient identity and matches a fixed-point oracle") {
    const auto& s = test::cube(17);
    const Params p = s.params(0.0, 0.0);
    const Field u = ground_state(p);
    const auto rec = make_record(u, p, SeedKind::GroundStateRay);
    CHECK(rec.positive);
    CHECK(rec.nehari_class.kind == NehariClass::Kind::Minus);
    const double q = lumped_quotient(u);
    CHECK(rec.energy == doctest::Approx(std::pow(q, 1.5) / 3.0).epsilon(1e-8));
    const double q_oracle = lumped_quotient(quotient_oracle(s.domain));
    MESSAGE("ground state quotient ", q, ", fixed-point oracle ", q_oracle);
    CHECK(q <= q_oracle * (1.0 + 1e-8));
    CHECK(q == doctest::Approx(q_oracle).epsilon(1e-6));
  }

  TEST_CASE("solver preconditions") {
    const auto& s = test::cube(9);
    CHECK_THROWS_AS(minimize_on_Nplus(s.params_rel(0.5, 0.0), s.spectral->e1()), PreconditionError);
    CHECK_THROWS_AS(minimize_on_Nplus(s.params_rel(0.5, 0.01), Field(s.domain)), ArgumentError);
    CHECK_THROWS_AS(minimize_on_Nminus(s.params_rel(0.5, 0.01), Field(s.domain)), ArgumentError);
    CHECK_THROWS_AS(estimate_mu_star(s.params_rel(0.5, 0.01), 1.1 * s.spectral->lambda1()), PreconditionError);
    CHECK_THROWS_AS(make_bubble(0.2, {1.0, 0.0, 0.0}, s.domain, 0.45), ArgumentError);
    CHECK_THROWS_AS(seed_kind_from_string("sideways"), ArgumentError);
  }

  TEST_CASE("bubble seeds") {
    const auto d = Domain::build(DomainSpec::annulus(3, 0.45, 17));
    const auto b = make_bubble(0.2, {0.0, 1.0, 0.0}, d, 0.45);
    double peak = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < d->size(); ++i) {
      REQUIRE(b.field[i] >= 0.0);
      if (b.field[i] > peak) peak = b.field[i], arg = i;
      const auto x = d->coords(i);
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      if (r <= 0.45) REQUIRE(b.field[i] == 0.0);
    }
    CHECK(d->coords(arg)[1] > 0.5);
    CHECK_THROWS_AS(make_bubble(0.0, {0.0, 1.0, 0.0}, d, 0.45), ArgumentError);
    CHECK_THROWS_AS(make_bubble(0.2, {0.0, 2.0, 0.0}, d, 0.45), ArgumentError);
    CHECK_THROWS_AS(make_bubble(0.2, {1.0, 0.0}, d, 0.45), ArgumentError);
    CHECK_THROWS_AS(make_bubble(0.2, {1.0, 0.0, 0.0}, d, 0.3), ArgumentError);
    CHECK(coordinate_directions(4).size() == 8);
  }

  TEST_CASE("mu continuation stays on certified N+ points") {
    const auto& s = test::cube(9);
    const Params base = s.params_rel(0.5, 0.01);
    ContinuationOptions c;
    c.max_solves = 40;
    c.track_minus = false;
    const auto res = estimate_mu_star(base, base.lambda(), c);
    REQUIRE(!res.branch.empty());
    CHECK(res.mu_star > 0.0);
    CHECK(res.solves <= 40);
    ContinuationOptions capped = c;
    capped.max_solves = 3;
    CHECK(estimate_mu_star(base, base.lambda(), capped).solves == 3);
    double prev = -1.0;
    for (const auto& bp : res.branch) {
      CHECK(bp.mu > prev);
      prev = bp.mu;
      CHECK(bp.accepted_plus);
    }
    CHECK(res.branch.back().mu == doctest::Approx(res.mu_star));
  }
}
