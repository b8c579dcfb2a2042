#pragma once
// Tensor-grid discretisation of the domain: masks, fields, the Dirichlet
// Laplacian, quadrature, and the spectral constants lambda1 and S.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnp/kernels.hpp"

namespace bnp {

enum class Shape { Box, AnnulusD };

/// Geometry plus resolution. `resolution` counts grid points per axis
/// including the two outermost (exterior) layers.
struct DomainSpec {
  Shape shape = Shape::Box;
  std::vector<double> sides;  ///< Box only, one per axis
  double delta0 = 0.0;        ///< AnnulusD only; shell delta0 <= |x| <= 1/delta0
  int dimension = 3;
  int resolution = 9;

  static DomainSpec box(int dim, std::vector<double> sides, int resolution);
  static DomainSpec cube(int dim, double side, int resolution);
  static DomainSpec annulus(int dim, double delta0, int resolution);

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

std::string to_string(const DomainSpec& spec);

/// A built, immutable grid. Interior nodes are numbered in row-major order of
/// the full tensor grid; `boundary` nodes are the exterior nodes that are
/// stencil neighbours of some interior node.
class Domain {
 public:
  static std::shared_ptr<const Domain> build(const DomainSpec& spec);

  const DomainSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dimension; }
  std::size_t size() const noexcept { return stencil_.nodes; }
  std::size_t boundary_size() const noexcept { return boundary_full_.size(); }
  int points_per_axis() const noexcept { return n_; }
  std::size_t full_size() const noexcept { return full_to_interior_.size(); }

  double h(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  double min_h() const;
  /// Quadrature weight of every interior node (cell volume).
  double weight() const noexcept { return weight_; }

  std::span<const double> coords(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  std::span<const double> boundary_coords(std::size_t b) const {
    return {bcoords_.data() + b * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  /// Coordinates of a node of the full tensor grid by multi-index.
  double axis_coordinate(int axis, int k) const;

  const kernels::Stencil& stencil() const noexcept { return stencil_; }
  std::span<const std::int32_t> full_to_interior() const noexcept { return full_to_interior_; }
  std::span<const std::size_t> interior_to_full() const noexcept { return interior_full_; }

 private:
  Domain() = default;

  DomainSpec spec_;
  int n_ = 0;
  std::vector<double> lower_;
  std::vector<double> h_;
  double weight_ = 0.0;
  std::vector<double> coords_;
  std::vector<double> bcoords_;
  std::vector<std::int32_t> full_to_interior_;
  std::vector<std::size_t> interior_full_;
  std::vector<std::size_t> boundary_full_;
  kernels::Stencil stencil_;
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Real grid function, one value per interior node.
class Field {
 public:
  Field() = default;
  explicit Field(DomainPtr domain);
  Field(DomainPtr domain, std::vector<double> values);

  const DomainPtr& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

  bool all_finite() const;
  bool is_zero() const;

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Throws ArgumentError unless both fields live on the same domain.
void require_same_domain(const Field& a, const Field& b);

/// Weighted L2 inner product.
double inner(const Field& a, const Field& b);

Field apply_laplacian(const Field& u);

struct Norms {
  double h1_sq = 0.0;  ///< ||u||^2 = integral |grad u|^2, one-sided differences
  double l2_sq = 0.0;
  double lp = 0.0;     ///< ||u||_p
};

Norms norms(const Field& u, double p);
double h1_seminorm_sq(const Field& u);
double l2_norm_sq(const Field& u);
/// ||u||_p^p; throws ArgumentError for p < 1.
double lp_power(const Field& u, double p);
double lp_norm(const Field& u, double p);

/// Critical exponent 2N/(N-2).
double critical_exponent(int dim);

struct Eigenpair {
  double lambda1 = 0.0;
  Field e1;
  double residual = 0.0;
  int iterations = 0;
};

/// Shifted inverse power iteration with CG inner solves. e1 > 0, ||e1||_2 = 1.
/// Stops once ||A e1 - lambda1 e1||_2 < tol * lambda1.
Eigenpair principal_eigenpair(const DomainPtr& domain, double tol = 1e-12,
                              int max_iterations = 500);

struct SobolevEstimate {
  double value = 0.0;   ///< achieved sobolev_quotient
  Field minimizer;      ///< normalised, ||I_h u||_{2*} = 1
  int iterations = 0;
  bool stagnated = false;  ///< iteration cap hit before the relative decrease fell below tol
};

/// Minimises sobolev_quotient from a bump centred in the thickest part of the
/// domain. The Sobolev gradient step of unit length, renormalised to the
/// 2*-sphere, decreases the quotient monotonically.
SobolevEstimate estimate_sobolev_S(const DomainPtr& domain, double tol = 1e-7,
                                   int max_iterations = 400);

// ---- conforming 2*-norm ----------------------------------------------------------
// Every grid cell is split into N! Kuhn simplices. The Dirichlet energy of the
// piecewise-linear interpolant (exterior values zero) equals h1_seminorm_sq
// exactly, so quotients built from the interpolant's Lp norm are Sobolev
// quotients of genuine H^1_0 functions and never fall below the continuum S.
// Lumped quadrature does not have this property: single-node spikes drive its
// quotient to a lattice constant below S.

/// ||I_h u||_p^p, exact for even integral p, Grundmann-Moller otherwise.
double conforming_lp_power(const Field& u, double p);
/// L2 representation g of the derivative: d/ds ||I_h (u + s v)||_p^p = <g, v>.
Field conforming_lp_power_gradient(const Field& u, double p);

/// Barycentric points and weights of the Grundmann-Moller rule of degree
/// 2s+1 on the n-simplex; integral over T ~ n! |T| sum w f.
struct SimplexRule {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};
SimplexRule grundmann_moller(int n, int s);

/// ||u||^2 / ||I_h u||_{2*}^2
double sobolev_quotient(const Field& u);

/// lambda1, e1, discrete S, and a per-lambda cache of ground states.
class SpectralData {
 public:
  SpectralData(DomainPtr domain, Eigenpair eig, SobolevEstimate sob);

  static std::shared_ptr<SpectralData> compute(const DomainPtr& domain);

  const DomainPtr& domain() const noexcept { return domain_; }
  double lambda1() const noexcept { return lambda1_; }
  const Field& e1() const noexcept { return e1_; }
  double sobolev_S() const noexcept { return sobolev_S_; }
  const SobolevEstimate& sobolev() const noexcept { return sobolev_; }
  double eigen_residual() const noexcept { return eigen_residual_; }

  std::optional<Field> cached_ground_state(double lambda) const;
  void store_ground_state(double lambda, Field u) const;

 private:
  DomainPtr domain_;
  double lambda1_;
  Field e1_;
  double eigen_residual_;
  SobolevEstimate sobolev_;
  double sobolev_S_;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, Field> ground_states_;
};

// ---- field dump ------------------------------------------------------------
// Header "N n_1 ... n_N", then one value per node of the full tensor grid in
// row-major order (exterior nodes 0), 17 significant digits.

void write_field(std::ostream& os, const Field& u);
void write_field(const std::string& path, const Field& u);
Field read_field(std::istream& is, const DomainPtr& domain);
Field read_field(const std::string& path, const DomainPtr& domain);

}  // namespace bnp
