#pragma once
// Sweeps over (lambda, mu) cells, per-lambda continuation in mu, run
// artifacts on disk and the plot-data report built from them.

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bnp/config.hpp"
#include "bnp/verify.hpp"

namespace bnp {

struct RunContext {
  DomainPtr domain;
  std::shared_ptr<const SpectralData> spectral;
  std::shared_ptr<const HarmonicLift> lift;
};

/// Builds the domain, spectral data and lift for a configuration.
RunContext build_context(const RunConfig& cfg);

struct CertifiedRecord {
  SolutionRecord record;
  Certificate certificate;
};

struct CellResult {
  double lambda = 0.0;
  double mu = 0.0;
  /// "solved", "nonexistence" or "failed"
  std::string status;
  std::string error;
  std::vector<CertifiedRecord> records;  ///< distinct records
  std::optional<Certificate> thresholds;
  std::optional<Certificate> nonexistence;
  std::vector<MultistartAttempt> attempts;
  std::optional<MinimaxResult> minimax;
  std::vector<std::string> notes;

  std::optional<double> m_plus() const;
  std::optional<double> m_minus() const;
  int certified() const;
};

/// Runs the configured searches on one cell. Every library error is caught
/// and reported through status "failed".
CellResult run_cell(const RunContext& ctx, const RunConfig& cfg, double lambda, double mu);

struct BoundaryRow {
  double lambda = 0.0;
  std::optional<MuStarResult> result;
  std::vector<bool> plus_certified;  ///< per branch point
  std::string error;
};

struct RunResult {
  double lambda1 = 0.0;
  double sobolev_S = 0.0;
  std::vector<CellResult> cells;  ///< lambda-major order
  std::vector<BoundaryRow> boundary;
};

/// Cells and continuation rows run in parallel, one task each. Progress lines
/// go to log when given.
RunResult run_sweep(const RunContext& ctx, const RunConfig& cfg, std::ostream* log = nullptr);

/// Writes run.json, cells/*.json, summary.csv and, when requested,
/// mu_star.csv, branches.csv and fields/ + records/ dumps.
void write_run(const RunResult& result, const RunContext& ctx, const RunConfig& cfg);

/// Reads a run directory and writes report/{heatmap,branches,boundary,
/// barycenters}.csv. Returns the summary text. Throws ConfigError when files
/// are missing or malformed.
std::string report_run(const std::string& directory);

}  // namespace bnp
