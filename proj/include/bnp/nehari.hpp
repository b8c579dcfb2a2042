#pragma once
// Fibering roots t+(v) < t0(v) < t-(v), Nehari classification by T''(1), the
// reduced functional J(v) = I(t-(v) v) on the normalised cone, barycentres.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bnp/functional.hpp"

namespace bnp {

struct NehariClass {
  enum class Kind { Plus, Minus, Zero, NotOnManifold };
  Kind kind = Kind::NotOnManifold;
  double t_first_deriv = 0.0;   ///< T'(1)
  double t_second_deriv = 0.0;  ///< T''(1)
  double tol_root = 0.0;
  double tol_class = 0.0;
};

std::string to_string(NehariClass::Kind k);
NehariClass::Kind nehari_kind_from_string(const std::string& s);

struct RayRoots {
  std::optional<double> t_plus;
  double t_minus = 0.0;
  double t0 = 0.0;
  double pairing_sign = 0.0;
  double tol_root = 0.0;
  std::vector<std::pair<double, double>> bracket_history;
};

/// Throws AdmissibilityError when the t0 numerator or T'(t0) is nonpositive.
RayRoots find_roots(const Field& v, const Params& p);

/// tol_root <= 0 selects the default 1e-8 * (1 + ||v||^2).
NehariClass classify(const Field& v, const Params& p, double tol_root = 0.0);

/// I(t-(v) v) for v >= 0 with ||v||_{2*} = 1.
double reduced_J(const Field& v_unit, const Params& p);

/// Gradient of J in the ambient L2 sense, through the chain rule for t-(v).
Field reduced_J_gradient(const Field& v_unit, const Params& p);

/// int x |v|^{2*} dx for v normalised to ||v||_{2*} = 1.
std::vector<double> barycenter(const Field& v);

/// int x/|x| |grad v|^2 dx (nodes at the origin are skipped).
std::vector<double> gradient_direction_integral(const Field& v);

enum class RaySet { AMinus, APlus, OnNMinus };
std::string to_string(RaySet s);

/// Compares t-(u/||u||)/||u|| with 1.
RaySet ray_set_membership(const Field& u, const Params& p, double tol = 1e-8);

struct AdmissibilityReport {
  bool admissible = true;
  double min_t0_numerator = 0.0;
  double min_dT_at_t0 = 0.0;
  std::string reason;
};

/// Operational admissibility of (lambda, mu): positive t0 numerator and
/// T'(t0) > 0 on probe rays (e1, phi, and off-centre bumps).
AdmissibilityReport check_admissibility(const Params& p);

}  // namespace bnp
