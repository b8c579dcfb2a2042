#include <doctest.h>

#include "bnp/errors.hpp"
#include "support.hpp"

using namespace bnp;

namespace {

// Bump plus a small random perturbation, so u stays well scaled.
Field test_field(const DomainPtr& d, std::mt19937_64& rng, double amp = 0.5) {
  return amp * test::smooth_bump(d) + test::random_field(d, rng, -0.1, 0.1);
}

}  // namespace

TEST_SUITE("functional") {
  TEST_CASE("gradient matches central differences of the energy") {
    const auto& s = test::cube(13);
    const Params p = s.params_rel(0.5, 0.02);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
      const Field v = test_field(s.domain, rng), h = test::random_field(s.domain, rng);
      const double eps = 1e-5;
      const double fd = (energy(v + eps * h, p) - energy(v - eps * h, p)) / (2 * eps);
      const double an = inner(gradient(v, p), h);
      CHECK(std::abs(fd - an) < 1e-6 * (1.0 + std::abs(an)));
    }
  }

  TEST_CASE("hessian matches central differences of the gradient") {
    const auto& s = test::cube(13);
    const Params p = s.params_rel(0.3, 0.05);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 10; ++k) {
      const Field v = test_field(s.domain, rng), h = test::random_field(s.domain, rng),
                  w = test::random_field(s.domain, rng);
      const double eps = 1e-5;
      const double fd = inner(gradient(v + eps * h, p) - gradient(v - eps * h, p), w) / (2 * eps);
      const double an = inner(hessian_apply(v, h, p), w);
      CHECK(std::abs(fd - an) < 1e-5 * (1.0 + std::abs(an)));
    }
  }

  TEST_CASE("mu = 0 fibering map in closed form") {
    const auto& s = test::cube(11);
    const Params p = s.params_rel(0.4, 0.0);
    const Field v = test::smooth_bump(s.domain, 2.0);
    const double a = h1_seminorm_sq(v), b = l2_norm_sq(v), q = p.two_star(), vp = lp_power(v, q);
    const FiberingProfile prof(v, p);
    CHECK(prof.pairing_sign() == 0.0);
    for (double t : {0.3, 1.0, 2.5}) {
      const auto f = prof(t);
      const double c = a - p.lambda() * b;
      CHECK(f.T == doctest::Approx(0.5 * c * t * t - vp / q * std::pow(t, q)).epsilon(1e-12));
      CHECK(f.dT == doctest::Approx(c * t - vp * std::pow(t, q - 1)).epsilon(1e-12));
      CHECK(f.d2T == doctest::Approx(c - (q - 1) * vp * std::pow(t, q - 2)).epsilon(1e-12));
    }
    // the closed-form t0 is half the inflection point when mu = 0
    const double t0 = std::pow((a - p.lambda() * b) / ((q - 1) * std::pow(2.0, q - 2) * vp), 1.0 / (q - 2));
    CHECK(prof(2.0 * t0).d2T == doctest::Approx(0.0).scale(a));
    CHECK(prof.t0() == doctest::Approx(t0).epsilon(1e-12));
  }

  TEST_CASE("fibering derivatives are consistent with the energy") {
    const auto& s = test::cube(11);
    const Params p = s.params_rel(0.6, 0.03);
    std::mt19937_64 rng(8);
    const Field v = test_field(s.domain, rng, 1.0);
    const FiberingProfile prof(v, p);
    for (double t : {0.1, 0.7, 1.6}) {
      CHECK(prof(t).T == doctest::Approx(energy(t * v, p)).epsilon(1e-11));
      const double eps = 1e-5;
      CHECK(prof(t).dT == doctest::Approx((prof(t + eps).T - prof(t - eps).T) / (2 * eps)).epsilon(1e-6));
      CHECK(prof(t).d2T == doctest::Approx((prof(t + eps).dT - prof(t - eps).dT) / (2 * eps)).epsilon(1e-6));
      CHECK(prof(t).dT == doctest::Approx(inner(gradient(t * v, p), v)).epsilon(1e-10));
    }
    CHECK(-prof(0.0).dT == doctest::Approx(prof.pairing_sign()).epsilon(1e-12));
  }

  TEST_CASE("residual norm is the L2 norm of the gradient") {
    const auto& s = test::cube(9);
    const Params p = s.params_rel(0.5, 0.01);
    std::mt19937_64 rng(3);
    const Field v = test_field(s.domain, rng);
    CHECK(residual_norm(v, p) == doctest::Approx(std::sqrt(l2_norm_sq(gradient(v, p)))).epsilon(1e-12));
  }

  TEST_CASE("nonpositive t0 numerator is reported") {
    const auto& s = test::cube(9);
    const Params p = s.params_rel(1.5, 0.0);
    const Field e1 = s.spectral->e1();
    CHECK(FiberingProfile(e1, p).t0_numerator() <= 0.0);
    CHECK_THROWS_AS(FiberingProfile(e1, p).t0(), AdmissibilityError);
  }
}
