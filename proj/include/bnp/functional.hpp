#pragma once
// Energy I(v) = 1/2||v||^2 - lambda/2 ||v+mu phi||_2^2 - 1/2* ||v+mu phi||_{2*}^{2*},
// its first and second variations, and fibering maps T(t) = I(t v).

#include <memory>

#include "bnp/grid.hpp"
#include "bnp/lift.hpp"

namespace bnp {

class Params {
 public:
  Params(double lambda, double mu, std::shared_ptr<const SpectralData> spectral,
         std::shared_ptr<const HarmonicLift> lift);

  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }
  double two_star() const noexcept { return two_star_; }
  int dim() const noexcept { return domain_->dim(); }
  const DomainPtr& domain() const noexcept { return domain_; }
  const SpectralData& spectral() const noexcept { return *spectral_; }
  const std::shared_ptr<const SpectralData>& spectral_ptr() const noexcept { return spectral_; }
  const HarmonicLift& lift() const noexcept { return *lift_; }
  const std::shared_ptr<const HarmonicLift>& lift_ptr() const noexcept { return lift_; }
  /// mu * phi
  const Field& shift() const noexcept { return shift_; }
  /// |x|^{2*-2}
  const kernels::PowerLaw& power() const noexcept { return power_; }

  Params with_mu(double mu) const { return Params(lambda_, mu, spectral_, lift_); }
  Params with_lambda(double lambda) const { return Params(lambda, mu_, spectral_, lift_); }

 private:
  double lambda_;
  double mu_;
  double two_star_;
  std::shared_ptr<const SpectralData> spectral_;
  std::shared_ptr<const HarmonicLift> lift_;
  DomainPtr domain_;
  Field shift_;
  kernels::PowerLaw power_;
};

double energy(const Field& v, const Params& p);
/// L2 representation of I'(v): -Lap v - lambda u - |u|^{2*-2} u, u = v + mu phi.
Field gradient(const Field& v, const Params& p);
/// I''(v) h = -Lap h - lambda h - (2*-1)|u|^{2*-2} h
Field hessian_apply(const Field& v, const Field& h, const Params& p);
/// ||gradient(v)||_2
double residual_norm(const Field& v, const Params& p);

struct FiberingValue {
  double T = 0.0;
  double dT = 0.0;
  double d2T = 0.0;
};

/// Fibering map along a fixed ray v != 0. The quadratic coefficients are
/// computed once; the 2*-integrals are re-evaluated for every t.
class FiberingProfile {
 public:
  FiberingProfile(Field v, const Params& p);

  FiberingValue operator()(double t) const;

  const Field& ray() const noexcept { return v_; }
  const Params& params() const noexcept { return p_; }
  double h1_sq() const noexcept { return a_; }
  double l2_sq() const noexcept { return b_; }
  double phi_dot_v() const noexcept { return c_; }
  double lp_pow() const noexcept { return vp_; }
  /// lambda mu int phi v + mu^{2*-1} int phi^{2*-1} v  (= -T'(0))
  double pairing_sign() const noexcept { return pairing_; }
  /// Numerator of the closed-form t0 (may be nonpositive).
  double t0_numerator() const noexcept { return t0_num_; }
  /// Closed-form t0; throws AdmissibilityError when the numerator is <= 0.
  double t0() const;

 private:
  Field v_;
  Params p_;
  double a_, b_, c_, phi2_, vp_;
  double pairing_;
  double t0_num_;
  double t0_den_;
};

FiberingValue fibering(const Field& v, const Params& p, double t);
double fibering_t0(const Field& v, const Params& p);

}  // namespace bnp
