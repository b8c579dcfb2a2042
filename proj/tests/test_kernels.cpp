#include <doctest.h>

#include <omp.h>

#include "bnp/kernels.hpp"
#include "support.hpp"

using namespace bnp;
namespace k = bnp::kernels;

namespace {

struct Data {
  DomainPtr d;
  std::vector<double> u, v, w;
  Data() : d(Domain::build(DomainSpec::cube(3, 1.0, 33))) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto* x : {&u, &v, &w}) {
      x->resize(d->size());
      for (auto& y : *x) y = dist(rng);
    }
  }
};

void close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  CHECK(worst <= tol * scale);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("OpenMP kernels agree with the serial reference") {
    const Data data;
    const auto& st = data.d->stencil();
    REQUIRE(data.u.size() > 4 * k::kBlock);
    const k::PowerLaw q4(4.0), q43(4.0 / 3.0);
    std::vector<double> a(data.u.size()), b(data.u.size());

    k::laplacian(st, data.u, a);
    k::serial::laplacian(st, data.u, b);
    close(a, b, 1e-14);

    CHECK(k::edge_energy(st, data.u) == doctest::Approx(k::serial::edge_energy(st, data.u)).epsilon(1e-13));
    CHECK(k::dot(data.u, data.v) == doctest::Approx(k::serial::dot(data.u, data.v)).epsilon(1e-12));
    for (const auto* q : {&q4, &q43})
      CHECK(k::abs_pow_sum(data.u, *q) == doctest::Approx(k::serial::abs_pow_sum(data.u, *q)).epsilon(1e-13));

    k::axpy(0.3, data.u, data.v, a);
    k::serial::axpy(0.3, data.u, data.v, b);
    close(a, b, 1e-14);

    k::gradient_assemble(data.w, data.u, 2.5, q4, a);
    k::serial::gradient_assemble(data.w, data.u, 2.5, q4, b);
    close(a, b, 1e-14);

    k::hessian_assemble(data.w, data.u, data.v, 2.5, 5.0, q4, a);
    k::serial::hessian_assemble(data.w, data.u, data.v, 2.5, 5.0, q4, b);
    close(a, b, 1e-14);

    const auto fa = k::fibering_sums(0.7, data.u, data.v, q4);
    const auto fb = k::serial::fibering_sums(0.7, data.u, data.v, q4);
    CHECK(fa.pow_p == doctest::Approx(fb.pow_p).epsilon(1e-13));
    CHECK(fa.pow_pv == doctest::Approx(fb.pow_pv).epsilon(1e-12));
    CHECK(fa.pow_qv2 == doctest::Approx(fb.pow_qv2).epsilon(1e-13));
  }

  TEST_CASE("reductions do not depend on the thread count") {
    const Data data;
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double d1 = k::dot(data.u, data.v);
    const double e1 = k::edge_energy(data.d->stencil(), data.u);
    const double c1 = conforming_lp_power(Field(data.d, data.u), 6.0);
    omp_set_num_threads(4);
    const double d4 = k::dot(data.u, data.v);
    const double e4 = k::edge_energy(data.d->stencil(), data.u);
    const double c4 = conforming_lp_power(Field(data.d, data.u), 6.0);
    omp_set_num_threads(saved);
    CHECK(d1 == d4);
    CHECK(e1 == e4);
    CHECK(c1 == c4);
  }

  TEST_CASE("power law expands integral exponents") {
    const k::PowerLaw q(4.0);
    CHECK(q.integral());
    CHECK(q(1.5) == 1.5 * 1.5 * 1.5 * 1.5);
    CHECK(q(0.0) == 0.0);
    const k::PowerLaw r(4.0 / 3.0);
    CHECK(!r.integral());
    CHECK(r(2.0) == doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-15));
  }
}
