#pragma once
// Shared fixtures for the unit tests.

#include <cmath>
#include <map>
#include <memory>
#include <random>

#include "bnp/functional.hpp"
#include "bnp/grid.hpp"
#include "bnp/lift.hpp"

namespace bnp::test {

struct Setup {
  DomainPtr domain;
  std::shared_ptr<const SpectralData> spectral;
  std::shared_ptr<const HarmonicLift> lift;

  Params params(double lambda, double mu) const { return Params(lambda, mu, spectral, lift); }
  Params params_rel(double lambda_rel, double mu) const {
    return params(lambda_rel * spectral->lambda1(), mu);
  }
};

inline Setup make_setup(const DomainSpec& spec, const BoundaryData& g = BoundaryData::make_constant(1.0)) {
  Setup s;
  s.domain = Domain::build(spec);
  s.spectral = SpectralData::compute(s.domain);
  s.lift = std::make_shared<HarmonicLift>(solve_lift(g, s.domain));
  return s;
}

/// Unit cube in N = 3, cached per resolution.
inline const Setup& cube(int n) {
  static std::map<int, Setup> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_setup(DomainSpec::cube(3, 1.0, n))).first;
  return it->second;
}

inline Field random_field(const DomainPtr& d, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Field f(d);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
  return f;
}

/// A smooth positive field vanishing on the box boundary: prod cos(pi x_a / L_a) raised to k.
inline Field smooth_bump(const DomainPtr& d, double power = 1.0) {
  Field f(d);
  const auto& sides = d->spec().sides;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = d->coords(i);
    double v = 1.0;
    for (std::size_t a = 0; a < x.size(); ++a) v *= std::cos(M_PI * x[a] / sides[a]);
    f[i] = std::pow(std::max(v, 0.0), power);
  }
  return f;
}

}  // namespace bnp::test
