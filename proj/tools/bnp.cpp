// Command-line front end: run sweeps, build reports, sample fibering maps and
// re-certify stored records.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bnp/config.hpp"
#include "bnp/errors.hpp"
#include "bnp/records.hpp"
#include "bnp/sweep.hpp"
#include "bnp/verify.hpp"

namespace {

using namespace bnp;

void apply_thread_env() {
  if (const char* env = std::getenv("BNP_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n < 1) throw ConfigError(std::string("BNP_NUM_THREADS must be a positive integer, got '") + env + "'");
    omp_set_num_threads(n);
  }
}

int cmd_run(const std::string& path, bool quiet) {
  const RunConfig cfg = load_config(path);
  const RunContext ctx = build_context(cfg);
  if (!quiet)
    std::cerr << "domain " << to_string(cfg.domain) << ", " << ctx.domain->size() << " nodes, lambda1 "
              << format_double(ctx.spectral->lambda1()) << ", S " << format_double(ctx.spectral->sobolev_S())
              << '\n';
  const RunResult res = run_sweep(ctx, cfg, quiet ? nullptr : &std::cerr);
  write_run(res, ctx, cfg);
  int failed = 0;
  for (const auto& c : res.cells) failed += c.status == "failed" ? 1 : 0;
  if (!quiet) std::cerr << res.cells.size() << " cells, " << failed << " failed\n";
  return failed == 0 ? 0 : 3;
}

int cmd_fibering(const std::string& config_path, const std::string& ray_path, double lambda_override,
                 double mu_override, int samples, double t_max, const std::string& out_path) {
  const RunConfig cfg = load_config(config_path);
  const RunContext ctx = build_context(cfg);
  double lambda = lambda_override >= 0.0 ? lambda_override : cfg.absolute_lambdas(ctx.spectral->lambda1()).front();
  const double mu = mu_override >= 0.0 ? mu_override : cfg.mus.front();
  const Params p(lambda, mu, ctx.spectral, ctx.lift);
  const Field v = read_field(ray_path, ctx.domain);
  const FiberingProfile prof(v, p);
  if (t_max <= 0.0) {
    // past the outer root when it exists, else a few multiples of t0
    try {
      t_max = 1.5 * find_roots(v, p).t_minus;
    } catch (const Error&) {
      const double num = prof.t0_numerator();
      t_max = num > 0.0 ? 3.0 * prof.t0() : 2.0;
    }
  }
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ConfigError("cannot write " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  os << "t,T,dT,d2T\n";
  for (int k = 0; k <= samples; ++k) {
    const double t = t_max * k / samples;
    const auto f = prof(t);
    os << format_double(t) << ',' << format_double(f.T) << ',' << format_double(f.dT) << ','
       << format_double(f.d2T) << '\n';
  }
  return 0;
}

int cmd_certify(const std::string& path, bool json_out) {
  const StoredRecord s = read_stored_record(path);
  const auto domain = Domain::build(s.domain);
  const auto spectral = SpectralData::compute(domain);
  const auto lift = std::make_shared<HarmonicLift>(solve_lift(s.boundary, domain));
  const Params p(s.lambda, s.mu, spectral, lift);
  auto rec = make_record(read_field(s.field_path, domain), p, s.seed);
  rec.converged = true;
  const Certificate cert = certify_solution(rec, p);
  if (json_out) std::cout << nlohmann::json(cert).dump(2) << '\n';
  else std::cout << format_table(cert);
  return cert.overall ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational solver and verification harness for critical-exponent problems with boundary data"};
  app.require_subcommand(1);

  std::string run_config;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
  run->add_option("config", run_config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_flag("-q,--quiet", quiet, "No progress output");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarise a run directory and write plot data");
  report->add_option("dir", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  std::string fib_config, fib_ray, fib_out;
  double fib_lambda = -1.0, fib_mu = -1.0, fib_tmax = 0.0;
  int fib_samples = 400;
  auto* fib = app.add_subcommand("fibering-profile", "Sample t -> I(t v) and its derivatives along a ray");
  fib->add_option("config", fib_config, "Config file")->required()->check(CLI::ExistingFile);
  fib->add_option("--ray", fib_ray, "Field file holding v")->required()->check(CLI::ExistingFile);
  fib->add_option("--lambda", fib_lambda, "Absolute lambda (default: first configured value)");
  fib->add_option("--mu", fib_mu, "mu (default: first configured value)");
  fib->add_option("--samples", fib_samples, "Number of intervals")->check(CLI::PositiveNumber);
  fib->add_option("--t-max", fib_tmax, "Upper end of the t range");
  fib->add_option("-o,--output", fib_out, "CSV output file (default stdout)");

  std::string cert_path;
  bool cert_json = false;
  auto* cert = app.add_subcommand("certify", "Re-certify a stored solution record");
  cert->add_option("record", cert_path, "Record JSON written by a run with dump_fields")
      ->required()
      ->check(CLI::ExistingFile);
  cert->add_flag("--json", cert_json, "Print the certificate as JSON");

  CLI11_PARSE(app, argc, argv);
  try {
    apply_thread_env();
    if (*run) return cmd_run(run_config, quiet);
    if (*report) {
      std::cout << report_run(report_dir);
      return 0;
    }
    if (*fib) return cmd_fibering(fib_config, fib_ray, fib_lambda, fib_mu, fib_samples, fib_tmax, fib_out);
    if (*cert) return cmd_certify(cert_path, cert_json);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
