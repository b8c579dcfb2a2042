#pragma once
// Run configuration: line-oriented "key = value" text with [sections].
//
//   [domain]      shape = box|annulus, dimension, resolution, side | sides, delta0
//   [boundary]    kind = constant|bump|table, value, direction, width, amplitude, file
//   [parameters]  lambda | lambda_rel (multiples of lambda1), mu
//   [search]      searches, epsilons, directions, budget_factor
//   [mu_star]     mu_start, step_start, min_step_rel, max_solves
//   [output]      directory, dump_fields, seed
//
// Numeric lists are comma separated; "a:b:n" expands to n evenly spaced
// values from a to b inclusive. '#' starts a comment.

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include "bnp/grid.hpp"
#include "bnp/lift.hpp"
#include "bnp/solve.hpp"

namespace bnp {

enum class Search { NPlus, NMinus, Multistart, Minimax, MuStar };
std::string to_string(Search s);

struct RunConfig {
  DomainSpec domain;
  BoundaryData boundary;
  /// Boundary value table for kind = table, relative to base_directory.
  std::string boundary_table_path;
  /// Either absolute values or multiples of lambda1, never both.
  std::vector<double> lambdas;
  bool lambda_relative = false;
  std::vector<double> mus;
  std::set<Search> searches;
  std::vector<double> epsilons{0.2};
  /// Leading entries of +e_1, -e_1, +e_2, ...; at most 2N.
  int directions = 0;
  int budget_factor = 1;
  ContinuationOptions continuation;
  std::string output_directory = "run";
  bool dump_fields = false;
  std::uint64_t seed = 1;
  /// Directory of the config file; the boundary table path resolves against
  /// it. The output directory is relative to the working directory.
  std::string base_directory = ".";

  bool has(Search s) const { return searches.count(s) != 0; }
  /// Lambda values in absolute units.
  std::vector<double> absolute_lambdas(double lambda1) const;
};

/// Throws ConfigError with "<source>:<line>: message" on any syntax or
/// validation failure.
RunConfig parse_config(std::istream& is, const std::string& source = "config");
RunConfig load_config(const std::string& path);

/// "0.1, 0.2" or "a:b:n"; throws ConfigError naming the offending text.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace bnp
