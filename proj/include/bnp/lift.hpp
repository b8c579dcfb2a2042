#pragma once
// Nonnegative boundary data and its discrete harmonic lift phi.

#include <string>
#include <vector>

#include "bnp/grid.hpp"

namespace bnp {

struct BoundaryData {
  enum class Kind { Constant, BumpOnBoundary, NodeTable };

  Kind kind = Kind::Constant;
  double constant = 1.0;
  /// BumpOnBoundary: amplitude * exp(-|x/|x| - direction|^2 / (2 width^2)).
  std::vector<double> direction;
  double width = 0.5;
  double amplitude = 1.0;
  /// NodeTable: one value per boundary node of the domain.
  std::vector<double> table;

  static BoundaryData make_constant(double c);
  static BoundaryData bump(std::vector<double> direction, double width, double amplitude);
  static BoundaryData node_table(std::vector<double> values);

  /// Values on the domain's boundary nodes. Throws AssumptionError when the
  /// data is negative somewhere or vanishes identically.
  std::vector<double> evaluate(const Domain& domain) const;
};

/// Two-column text table "boundary_node_index value", one row per node.
std::vector<double> read_boundary_table(const std::string& path, std::size_t boundary_size);

struct HarmonicLift {
  Field phi;
  BoundaryData g;
  std::vector<double> g_values;  ///< g on the boundary nodes
  /// max over interior nodes of |(A phi - b)_i| / diag(A), i.e. the defect of
  /// the discrete mean-value property.
  double residual = 0.0;
  double g_max = 0.0;
  double g_min = 0.0;
};

HarmonicLift solve_lift(const BoundaryData& g, const DomainPtr& domain);

/// Boundary contribution b with A phi = b for the lift problem.
Field lift_rhs(const DomainPtr& domain, const std::vector<double>& g_values);

/// u = v + mu * phi
Field compose_solution(const Field& v, double mu, const HarmonicLift& lift);

}  // namespace bnp
