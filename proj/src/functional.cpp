#include "bnp/functional.hpp"

#include <cmath>

#include "bnp/errors.hpp"

namespace bnp {

Params::Params(double lambda, double mu, std::shared_ptr<const SpectralData> spectral,
               std::shared_ptr<const HarmonicLift> lift)
    : lambda_(lambda),
      mu_(mu),
      two_star_(0.0),
      spectral_(std::move(spectral)),
      lift_(std::move(lift)),
      power_(1.0) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ArgumentError("lambda must be finite and >= 0");
  if (!std::isfinite(mu) || mu < 0.0) throw ArgumentError("mu must be finite and >= 0");
  if (!spectral_ || !lift_) throw ArgumentError("params need spectral data and a lift");
  domain_ = spectral_->domain();
  if (lift_->phi.domain() != domain_) throw ArgumentError("lift and spectral data on different domains");
  two_star_ = critical_exponent(domain_->dim());
  power_ = kernels::PowerLaw(two_star_ - 2.0);
  shift_ = mu_ * lift_->phi;
}

double energy(const Field& v, const Params& p) {
  require_same_domain(v, p.shift());
  const Field u = v + p.shift();
  const double w = p.domain()->weight();
  const double a = h1_seminorm_sq(v);
  const double b = w * kernels::dot(u.values(), u.values());
  const double c = w * kernels::abs_pow_sum(u.values(), kernels::PowerLaw(p.two_star()));
  return 0.5 * a - 0.5 * p.lambda() * b - c / p.two_star();
}

Field gradient(const Field& v, const Params& p) {
  require_same_domain(v, p.shift());
  const Field u = v + p.shift();
  Field out = apply_laplacian(v);
  kernels::gradient_assemble(out.values(), u.values(), p.lambda(), p.power(), out.values());
  return out;
}

Field hessian_apply(const Field& v, const Field& h, const Params& p) {
  require_same_domain(v, p.shift());
  require_same_domain(h, v);
  const Field u = v + p.shift();
  Field out = apply_laplacian(h);
  kernels::hessian_assemble(out.values(), u.values(), h.values(), p.lambda(), p.two_star() - 1.0,
                            p.power(), out.values());
  return out;
}

double residual_norm(const Field& v, const Params& p) { return std::sqrt(l2_norm_sq(gradient(v, p))); }

FiberingProfile::FiberingProfile(Field v, const Params& p) : v_(std::move(v)), p_(p) {
  require_same_domain(v_, p.shift());
  if (v_.is_zero()) throw ArgumentError("fibering map needs a nonzero ray");
  const double w = p.domain()->weight();
  const double ps = p.two_star();
  const double mu = p.mu();
  const Field& phi = p.lift().phi;
  a_ = h1_seminorm_sq(v_);
  b_ = w * kernels::dot(v_.values(), v_.values());
  c_ = w * kernels::dot(phi.values(), v_.values());
  phi2_ = w * kernels::dot(phi.values(), phi.values());
  vp_ = w * kernels::abs_pow_sum(v_.values(), kernels::PowerLaw(ps));

  double phi_pm1_v = 0.0, phi_q_v2 = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const double f = std::abs(phi[i]);
    const double fq = p.power()(f);
    phi_pm1_v += fq * phi[i] * v_[i];
    phi_q_v2 += fq * v_[i] * v_[i];
  }
  phi_pm1_v *= w;
  phi_q_v2 *= w;

  pairing_ = p.lambda() * mu * c_ + std::pow(mu, ps - 1.0) * phi_pm1_v;
  const double k = (ps - 1.0) * std::pow(2.0, ps - 2.0);
  t0_num_ = a_ - p.lambda() * b_ - k * std::pow(mu, ps - 2.0) * phi_q_v2;
  t0_den_ = k * vp_;
}

double FiberingProfile::t0() const {
  if (!(t0_num_ > 0.0))
    throw AdmissibilityError(a_ - p_.lambda() * b_ <= 0.0
                                 ? "t0 numerator is nonpositive: ||v||^2 <= lambda ||v||_2^2 on this ray"
                                 : "mu too large: t0 numerator is nonpositive",
                             t0_num_);
  return std::pow(t0_num_ / t0_den_, 1.0 / (p_.two_star() - 2.0));
}

FiberingValue FiberingProfile::operator()(double t) const {
  const Params& p = p_;
  const double w = p.domain()->weight();
  const double lam = p.lambda();
  const double mu = p.mu();
  const auto s = kernels::fibering_sums(t, v_.values(), p.shift().values(), p.power());
  FiberingValue out;
  out.T = 0.5 * t * t * a_ - 0.5 * lam * (t * t * b_ + 2.0 * t * mu * c_ + mu * mu * phi2_) -
          w * s.pow_p / p.two_star();
  out.dT = t * a_ - lam * (t * b_ + mu * c_) - w * s.pow_pv;
  out.d2T = a_ - lam * b_ - (p.two_star() - 1.0) * w * s.pow_qv2;
  return out;
}

FiberingValue fibering(const Field& v, const Params& p, double t) {
  if (!(t >= 0.0)) throw ArgumentError("fibering map is defined for t >= 0");
  return FiberingProfile(v, p)(t);
}

double fibering_t0(const Field& v, const Params& p) { return FiberingProfile(v, p).t0(); }

}  // namespace bnp
