// OpenMP kernels against the serial reference on a 3-D box grid.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "bnp/grid.hpp"
#include "bnp/kernels.hpp"

namespace {

struct Fixture {
  bnp::DomainPtr domain;
  std::vector<double> u, v, out;

  explicit Fixture(int n) : domain(bnp::Domain::build(bnp::DomainSpec::cube(3, 1.0, n))) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    u.resize(domain->size());
    v.resize(domain->size());
    out.resize(domain->size());
    for (auto& x : u) x = dist(rng);
    for (auto& x : v) x = dist(rng);
  }
};

Fixture& fixture(int n) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& f = cache[n];
  if (!f) f = std::make_unique<Fixture>(n);
  return *f;
}

template <bool Parallel>
void BM_Laplacian(benchmark::State& state) {
  auto& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      bnp::kernels::laplacian(f.domain->stencil(), f.u, f.out);
    else
      bnp::kernels::serial::laplacian(f.domain->stencil(), f.u, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.u.size()));
}

template <bool Parallel>
void BM_FiberingSums(benchmark::State& state) {
  auto& f = fixture(static_cast<int>(state.range(0)));
  const bnp::kernels::PowerLaw q(4.0);
  for (auto _ : state) {
    bnp::kernels::FiberingSums s;
    if constexpr (Parallel)
      s = bnp::kernels::fibering_sums(0.7, f.u, f.v, q);
    else
      s = bnp::kernels::serial::fibering_sums(0.7, f.u, f.v, q);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.u.size()));
}

template <bool Parallel>
void BM_FractionalPower(benchmark::State& state) {
  auto& f = fixture(static_cast<int>(state.range(0)));
  const bnp::kernels::PowerLaw p(10.0 / 3.0);
  for (auto _ : state) {
    double s;
    if constexpr (Parallel)
      s = bnp::kernels::abs_pow_sum(f.u, p);
    else
      s = bnp::kernels::serial::abs_pow_sum(f.u, p);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.u.size()));
}

}  // namespace

BENCHMARK(BM_Laplacian<false>)->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_Laplacian<true>)->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_FiberingSums<false>)->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_FiberingSums<true>)->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_FractionalPower<false>)->Arg(33)->Arg(65);
BENCHMARK(BM_FractionalPower<true>)->Arg(33)->Arg(65);

BENCHMARK_MAIN();
