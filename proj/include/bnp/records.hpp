#pragma once
// JSON forms of solution records and of the context needed to rebuild them.

#include <string>

#include <json.hpp>

#include "bnp/lift.hpp"
#include "bnp/solve.hpp"

namespace bnp {

nlohmann::json to_json(const DomainSpec& d);
DomainSpec domain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BoundaryData& g);
BoundaryData boundary_from_json(const nlohmann::json& j);

/// lambda, mu, energy, class, grad_norm, positive, seed, barycenter,
/// iterations and the remaining scalar diagnostics; the field itself is not
/// included.
nlohmann::json to_json(const SolutionRecord& r);

/// A record together with its domain, boundary data and the path of the dump
/// of v, as written by a run.
struct StoredRecord {
  DomainSpec domain;
  BoundaryData boundary;
  double lambda = 0.0;
  double mu = 0.0;
  SeedKind seed = SeedKind::ZeroRelax;
  std::string field_path;  ///< absolute or relative to the record file
  nlohmann::json raw;
};

nlohmann::json stored_record_json(const SolutionRecord& r, const DomainSpec& d, const BoundaryData& g,
                                  const std::string& field_path);

/// Throws ConfigError on unreadable or malformed files.
StoredRecord read_stored_record(const std::string& path);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace bnp
