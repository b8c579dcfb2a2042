#pragma once
// Certificates: named numerical checks of the statements a solution or a
// parameter cell is supposed to satisfy. Each check name carries the
// inequality or identity it tests.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bnp/solve.hpp"

namespace bnp {

struct Check {
  std::string name;
  bool passed = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
};

struct Certificate {
  std::vector<Check> checks;
  /// Derived numbers worth reporting that are not pass/fail (radii, levels).
  std::vector<std::pair<std::string, double>> quantities;
  bool overall = true;
  /// Set when the checks hold with equality and decide nothing.
  bool inconclusive = false;

  void add(Check c);
  /// lhs < rhs with margin strictly above kStrictMargin.
  void add_less(std::string name, double lhs, double rhs);
  /// |lhs - rhs| <= tol.
  void add_equal(std::string name, double lhs, double rhs, double tol);
  void note(std::string name, double value);
  const Check* find(const std::string& prefix) const;
};

/// Strict inequalities must hold with at least this margin.
inline constexpr double kStrictMargin = 1e-12;
/// Relative tolerance of identity checks.
inline constexpr double kIdentityTolerance = 1e-10;

struct EnergyLevels {
  double m_plus = 0.0;
  std::optional<double> m_minus;
};

/// Residual, positivity, class and sign checks recomputed from rec.v; the gap
/// check for N- records and the window check for minimax records when the
/// levels are known. Failures are recorded, never thrown.
Certificate certify_solution(const SolutionRecord& rec, const Params& p,
                             const std::optional<EnergyLevels>& levels = std::nullopt);

/// The e1 pairing argument for lambda >= lambda1: a solution v >= 0 would need
///   int (-Lap v) e1 = lambda1 int v e1 = int (lambda u + u^{2*-1}) e1,
/// but the right side exceeds the left by at least lambda mu int phi e1 > 0.
/// With no candidate only the a-priori margin is reported. Throws
/// PreconditionError for lambda < lambda1.
Certificate nonexistence_certificate(const Params& p, const std::optional<Field>& candidate);

/// Radius of the ball around 0 on which the energy is strictly convex,
///   ( (1/2)(1 - lambda/lambda1) S / ((2*-1) 2^{2*-2} S^{(2*-2)/2}) )^{1/(2*-2)}.
double convexity_radius(const Params& p);

/// Samples u with ||u|| < r and h != 0 (smooth, single-node and ground-state
/// directions) and checks <I''(u) h, h> > 0; checks ||v+|| < r when given.
/// Throws PreconditionError for lambda >= lambda1.
Certificate convexity_ball_check(const Params& p, int trials, std::uint64_t seed,
                                 const std::optional<Field>& vplus = std::nullopt);

/// m+, m-, the quantum, the ordering and gap inequalities, and every record's
/// position relative to (m+ + quantum, m- + quantum). Minimax records must lie
/// inside that window. Throws IncompleteInputError without a Plus and a
/// Minus record.
Certificate threshold_report(const Params& p, const std::vector<SolutionRecord>& records);

void to_json(nlohmann::json& j, const Check& c);
void to_json(nlohmann::json& j, const Certificate& c);

/// Fixed-width table for terminals.
std::string format_table(const Certificate& c);

}  // namespace bnp
