#include "bnp/sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "bnp/errors.hpp"
#include "bnp/records.hpp"

namespace bnp {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- context -------------------------------------------------------------------------

RunContext build_context(const RunConfig& cfg) {
  RunContext ctx;
  ctx.domain = Domain::build(cfg.domain);
  ctx.spectral = SpectralData::compute(ctx.domain);
  BoundaryData g = cfg.boundary;
  if (g.kind == BoundaryData::Kind::NodeTable && g.table.empty()) {
    fs::path path = cfg.boundary_table_path;
    if (path.is_relative()) path = fs::path(cfg.base_directory) / path;
    g = BoundaryData::node_table(read_boundary_table(path.string(), ctx.domain->boundary_size()));
  }
  ctx.lift = std::make_shared<HarmonicLift>(solve_lift(g, ctx.domain));
  return ctx;
}

// ---- cells ---------------------------------------------------------------------------

std::optional<double> CellResult::m_plus() const {
  std::optional<double> m;
  for (const auto& r : records)
    if (r.certificate.overall && r.record.nehari_class.kind == NehariClass::Kind::Plus)
      m = m ? std::min(*m, r.record.energy) : r.record.energy;
  return m;
}

std::optional<double> CellResult::m_minus() const {
  std::optional<double> m;
  for (const auto& r : records)
    if (r.certificate.overall && r.record.nehari_class.kind == NehariClass::Kind::Minus &&
        r.record.seed != SeedKind::Minimax)
      m = m ? std::min(*m, r.record.energy) : r.record.energy;
  return m;
}

int CellResult::certified() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(),
                                        [](const CertifiedRecord& r) { return r.certificate.overall; }));
}

namespace {

constexpr double kDistinct = 1e-4;

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.budget_factor = cfg.budget_factor;
  o.max_descent_iterations *= cfg.budget_factor;
  o.max_newton_iterations *= cfg.budget_factor;
  return o;
}

std::vector<std::vector<double>> chosen_directions(const RunConfig& cfg) {
  auto all = coordinate_directions(cfg.domain.dimension);
  all.resize(static_cast<std::size_t>(cfg.directions));
  return all;
}

// appends rec unless it is within kDistinct of a record already kept
void keep_distinct(std::vector<SolutionRecord>& kept, SolutionRecord rec) {
  for (const auto& k : kept)
    if (std::sqrt(h1_seminorm_sq(k.v - rec.v)) < kDistinct) return;
  kept.push_back(std::move(rec));
}

void run_nonexistence(CellResult& cell, const Params& p, const RunConfig& cfg) {
  cell.status = "nonexistence";
  Certificate cert = nonexistence_certificate(p, std::nullopt);
  const Certificate probe = nonexistence_certificate(p, p.spectral().e1());
  for (auto c : probe.checks) {
    c.name = "probe e1, " + c.name;
    cert.add(std::move(c));
  }
  for (const auto& [k, v] : probe.quantities) cert.note("probe e1, " + k, v);
  // the solvers get ten times the usual budget and must still come back empty
  SolverOptions o = solver_options(cfg);
  o.budget_factor *= 10;
  o.max_descent_iterations *= 10;
  o.max_newton_iterations *= 10;
  int attempts = 0, certified = 0;
  auto attempt = [&](const std::string& label, auto&& solve) {
    ++attempts;
    try {
      SolutionRecord rec = solve();
      const bool ok = accepted(rec);
      certified += ok ? 1 : 0;
      std::string why = ok ? "certified record (unexpected)" : "no certified record";
      if (!ok) {
        why += rec.converged ? " (converged" : " (not converged";
        if (!rec.positive) why += ", u changes sign";
        why += ", class " + to_string(rec.nehari_class.kind) + ")";
      }
      cell.notes.push_back(label + ": " + why + ", residual " + format_double(rec.grad_norm));
    } catch (const Error& e) {
      cell.notes.push_back(label + ": " + e.what());
    }
  };
  if (cfg.has(Search::NPlus) && p.mu() > 0.0)
    attempt("nplus", [&] { return minimize_on_Nplus(p, zero_relax_seed(p), o); });
  if (cfg.has(Search::NMinus))
    attempt("nminus", [&] { return minimize_on_Nminus(p, p.spectral().e1(), o); });
  if (attempts > 0) {
    // the projections above reject most rays outright; plain Newton iterates
    // on the full gradient from a positive seed
    attempt("newton", [&] {
      Field v = ground_state(p.with_lambda(0.5 * p.spectral().lambda1()).with_mu(0.0), o);
      int its = 0;
      const bool ok = newton_polish(v, p, false, o, its);
      SolutionRecord rec = make_record(v, p, SeedKind::GroundStateRay);
      rec.converged = ok;
      rec.iterations = its;
      return rec;
    });
  }
  if (attempts > 0)
    cert.add({"solvers: no certified record with 10x budget", certified == 0, static_cast<double>(certified), 0.0,
              0.0});
  cell.nonexistence = std::move(cert);
}

void run_existence(CellResult& cell, const Params& p, const RunConfig& cfg) {
  cell.status = "solved";
  const SolverOptions opts = solver_options(cfg);
  std::vector<SolutionRecord> found;
  std::optional<SolutionRecord> vplus;

  const bool need_plus = cfg.has(Search::NPlus) || cfg.has(Search::Multistart) || cfg.has(Search::Minimax);
  if (need_plus) {
    if (p.mu() == 0.0) {
      cell.notes.push_back("nplus: N+ is empty at mu = 0");
    } else {
      try {
        auto rec = minimize_on_Nplus(p, zero_relax_seed(p), opts);
        if (accepted(rec)) vplus = rec;
        else cell.notes.push_back("nplus: minimiser not certified");
        if (cfg.has(Search::NPlus)) keep_distinct(found, std::move(rec));
      } catch (const Error& e) {
        cell.notes.push_back(std::string("nplus: ") + e.what());
      }
    }
  }
  const bool need_minus = cfg.has(Search::NMinus) || cfg.has(Search::Minimax);
  if (need_minus) {
    try {
      auto rec = minimize_on_Nminus(p, ground_state(p, opts), opts);
      if (!accepted(rec)) cell.notes.push_back("nminus: minimiser not certified");
      keep_distinct(found, std::move(rec));
    } catch (const Error& e) {
      cell.notes.push_back(std::string("nminus: ") + e.what());
    }
  }
  if (cfg.has(Search::Multistart)) {
    if (!vplus) {
      cell.notes.push_back("multistart: skipped, no certified N+ record");
    } else {
      for (double eps : cfg.epsilons) {
        try {
          auto ms = multistart_Nminus(p, *vplus, chosen_directions(cfg), eps, opts);
          for (auto& a : ms.attempts) cell.attempts.push_back(std::move(a));
          for (auto& r : ms.records) keep_distinct(found, std::move(r));
        } catch (const Error& e) {
          cell.notes.push_back("multistart eps " + format_double(eps) + ": " + e.what());
        }
      }
    }
  }
  if (cfg.has(Search::Minimax)) {
    std::optional<double> m_minus;
    for (const auto& r : found)
      if (accepted(r) && r.nehari_class.kind == NehariClass::Kind::Minus)
        m_minus = m_minus ? std::min(*m_minus, r.energy) : r.energy;
    if (!vplus || !m_minus) {
      cell.notes.push_back("minimax: skipped, needs certified N+ and N- records");
    } else {
      try {
        // the smallest epsilon gives the sharpest boundary profiles
        const double eps = *std::min_element(cfg.epsilons.begin(), cfg.epsilons.end());
        std::vector<SolutionRecord> known;
        for (const auto& r : found)
          if (accepted(r)) known.push_back(r);
        auto mm = minimax_gamma(p, eps, vplus->energy, *m_minus, known, opts);
        if (mm.record) keep_distinct(found, *mm.record);
        else cell.notes.push_back("minimax: not found, " + mm.reason);
        mm.record.reset();
        cell.minimax = std::move(mm);
      } catch (const Error& e) {
        cell.notes.push_back(std::string("minimax: ") + e.what());
      }
    }
  }

  // certify against the levels established by the certified records
  std::optional<EnergyLevels> levels;
  if (vplus) {
    levels = EnergyLevels{vplus->energy, std::nullopt};
    for (const auto& r : found)
      if (accepted(r) && r.nehari_class.kind == NehariClass::Kind::Minus && r.seed != SeedKind::Minimax)
        levels->m_minus = levels->m_minus ? std::min(*levels->m_minus, r.energy) : r.energy;
  }
  for (auto& r : found) {
    Certificate c = certify_solution(r, p, levels);
    cell.records.push_back({std::move(r), std::move(c)});
  }
  std::vector<SolutionRecord> certified;
  for (const auto& r : cell.records)
    if (r.certificate.overall) certified.push_back(r.record);
  try {
    cell.thresholds = threshold_report(p, certified);
  } catch (const IncompleteInputError&) {
  }
}

}  // namespace

CellResult run_cell(const RunContext& ctx, const RunConfig& cfg, double lambda, double mu) {
  CellResult cell;
  cell.lambda = lambda;
  cell.mu = mu;
  try {
    const Params p(lambda, mu, ctx.spectral, ctx.lift);
    if (lambda >= ctx.spectral->lambda1()) run_nonexistence(cell, p, cfg);
    else run_existence(cell, p, cfg);
  } catch (const std::exception& e) {
    cell.status = "failed";
    cell.error = e.what();
  }
  return cell;
}

// ---- sweep ---------------------------------------------------------------------------

RunResult run_sweep(const RunContext& ctx, const RunConfig& cfg, std::ostream* log) {
  RunResult out;
  out.lambda1 = ctx.spectral->lambda1();
  out.sobolev_S = ctx.spectral->sobolev_S();
  const auto lambdas = cfg.absolute_lambdas(out.lambda1);

  const bool cells_wanted = std::any_of(cfg.searches.begin(), cfg.searches.end(),
                                        [](Search s) { return s != Search::MuStar; });
  if (cells_wanted) {
    for (double l : lambdas)
      for (double m : cfg.mus) {
        CellResult c;
        c.lambda = l;
        c.mu = m;
        out.cells.push_back(std::move(c));
      }
    const auto n = static_cast<std::int64_t>(out.cells.size());
    // one task per cell; kernels inside a task run serially
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
    for (std::int64_t k = 0; k < n; ++k) {
      auto& c = out.cells[static_cast<std::size_t>(k)];
      c = run_cell(ctx, cfg, c.lambda, c.mu);
      if (log) {
#pragma omp critical(bnp_log)
        *log << "cell lambda=" << format_double(c.lambda) << " mu=" << format_double(c.mu) << ": " << c.status
             << ", " << c.certified() << " certified\n";
      }
    }
  }

  if (cfg.has(Search::MuStar)) {
    for (double l : lambdas) {
      BoundaryRow row;
      row.lambda = l;
      out.boundary.push_back(std::move(row));
    }
    const auto n = static_cast<std::int64_t>(out.boundary.size());
    const Params base(lambdas.front(), cfg.continuation.mu_start, ctx.spectral, ctx.lift);
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
    for (std::int64_t k = 0; k < n; ++k) {
      auto& row = out.boundary[static_cast<std::size_t>(k)];
      if (row.lambda >= out.lambda1) {
        row.error = "lambda >= lambda1: no solutions, see the nonexistence certificate";
        continue;
      }
      try {
        ContinuationOptions copts = cfg.continuation;
        copts.keep_records = true;
        auto res = estimate_mu_star(base, row.lambda, copts, solver_options(cfg));
        for (std::size_t b = 0; b < res.branch.size(); ++b) {
          const Params p = base.with_lambda(row.lambda).with_mu(res.branch[b].mu);
          row.plus_certified.push_back(certify_solution(res.plus_records[b], p).overall);
        }
        res.plus_records.clear();
        row.result = std::move(res);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (log) {
#pragma omp critical(bnp_log)
        *log << "mu_star lambda=" << format_double(row.lambda) << ": "
             << (row.result ? format_double(row.result->mu_star) : row.error) << '\n';
      }
    }
  }
  return out;
}

// ---- artifacts -----------------------------------------------------------------------

namespace {

std::string opt_number(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

std::string cell_name(std::size_t k) {
  std::ostringstream os;
  os << "cell_" << std::setw(4) << std::setfill('0') << k;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
}

}  // namespace

void write_run(const RunResult& result, const RunContext& ctx, const RunConfig& cfg) {
  const fs::path dir = cfg.output_directory;
  fs::create_directories(dir / "cells");
  if (cfg.dump_fields) {
    fs::create_directories(dir / "fields");
    fs::create_directories(dir / "records");
  }

  json run{{"domain", to_json(cfg.domain)},
           {"boundary", to_json(ctx.lift->g)},
           {"lambda1", result.lambda1},
           {"sobolev_S", result.sobolev_S},
           {"energy_quantum", std::pow(result.sobolev_S, cfg.domain.dimension / 2.0) / cfg.domain.dimension},
           {"eigen_residual", ctx.spectral->eigen_residual()},
           {"nodes", ctx.domain->size()},
           {"searches", json::array()},
           {"cells", result.cells.size()},
           {"seed", cfg.seed}};
  for (auto s : cfg.searches) run["searches"].push_back(to_string(s));
  write_text(dir / "run.json", run.dump(2) + "\n");

  std::ostringstream csv;
  csv << "lambda,lambda_rel,mu,status,m_plus,m_minus,energy_quantum,solutions,certified,error\n";
  const double quantum = run["energy_quantum"];
  for (std::size_t k = 0; k < result.cells.size(); ++k) {
    const auto& c = result.cells[k];
    json cj{{"lambda", c.lambda},
            {"lambda_rel", c.lambda / result.lambda1},
            {"mu", c.mu},
            {"status", c.status},
            {"error", c.error},
            {"notes", c.notes},
            {"records", json::array()}};
    for (std::size_t r = 0; r < c.records.size(); ++r) {
      json rj = to_json(c.records[r].record);
      rj["certificate"] = c.records[r].certificate;
      if (cfg.dump_fields) {
        const std::string stem = cell_name(k) + "_rec" + std::to_string(r);
        write_field((dir / "fields" / (stem + ".txt")).string(), c.records[r].record.v);
        const json stored = stored_record_json(c.records[r].record, cfg.domain, ctx.lift->g,
                                               "../fields/" + stem + ".txt");
        write_text(dir / "records" / (stem + ".json"), stored.dump(2) + "\n");
        rj["field"] = "fields/" + stem + ".txt";
      }
      cj["records"].push_back(std::move(rj));
    }
    if (c.thresholds) cj["thresholds"] = *c.thresholds;
    if (c.nonexistence) cj["nonexistence"] = *c.nonexistence;
    if (!c.attempts.empty()) {
      cj["multistart"] = json::array();
      for (const auto& a : c.attempts)
        cj["multistart"].push_back({{"direction", a.direction},
                                    {"seed_energy", a.seed_energy},
                                    {"seed_below_threshold", a.seed_below_threshold},
                                    {"converged", a.converged},
                                    {"energy", a.energy},
                                    {"error", a.error}});
    }
    if (c.minimax)
      cj["minimax"] = {{"family_sup", c.minimax->family_sup},
                       {"boundary_level", c.minimax->boundary_level},
                       {"window_low", c.minimax->window_low},
                       {"window_high", c.minimax->window_high},
                       {"relaxation_sweeps", c.minimax->relaxation_sweeps},
                       {"reason", c.minimax->reason}};
    write_text(dir / "cells" / (cell_name(k) + ".json"), cj.dump(2) + "\n");

    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    csv << format_double(c.lambda) << ',' << format_double(c.lambda / result.lambda1) << ','
        << format_double(c.mu) << ',' << c.status << ',' << opt_number(c.m_plus()) << ','
        << opt_number(c.m_minus()) << ',' << format_double(quantum) << ',' << c.records.size() << ','
        << c.certified() << ',' << err << '\n';
  }
  write_text(dir / "summary.csv", csv.str());

  if (cfg.has(Search::MuStar)) {
    std::ostringstream ms, br;
    ms << "lambda,lambda_rel,mu_star,solves,branch_points,all_certified,error\n";
    br << "lambda,mu,energy_plus,energy_minus,converged_plus,converged_minus,certified_plus\n";
    for (const auto& row : result.boundary) {
      std::string err = row.error;
      std::replace(err.begin(), err.end(), ',', ';');
      if (!row.result) {
        ms << format_double(row.lambda) << ',' << format_double(row.lambda / result.lambda1) << ",,,,," << err
           << '\n';
        continue;
      }
      const auto& r = *row.result;
      const bool all = std::all_of(row.plus_certified.begin(), row.plus_certified.end(), [](bool b) { return b; });
      ms << format_double(row.lambda) << ',' << format_double(row.lambda / result.lambda1) << ','
         << format_double(r.mu_star) << ',' << r.solves << ',' << r.branch.size() << ',' << (all ? 1 : 0) << ",\n";
      for (std::size_t b = 0; b < r.branch.size(); ++b) {
        const auto& bp = r.branch[b];
        br << format_double(row.lambda) << ',' << format_double(bp.mu) << ',' << format_double(bp.energy_plus)
           << ',' << (bp.converged_minus ? format_double(bp.energy_minus) : "") << ','
           << (bp.converged_plus ? 1 : 0) << ',' << (bp.converged_minus ? 1 : 0) << ','
           << (row.plus_certified[b] ? 1 : 0) << '\n';
      }
    }
    write_text(dir / "mu_star.csv", ms.str());
    write_text(dir / "branches.csv", br.str());
  }
}

// ---- report --------------------------------------------------------------------------

namespace {

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("missing run file " + path.string());
  try {
    json j;
    is >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("corrupt run file " + path.string() + ": " + e.what());
  }
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t columns) {
  std::ifstream is(path);
  if (!is) throw ConfigError("missing run file " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string item;
    std::istringstream ls(line);
    while (std::getline(ls, item, ',')) cells.push_back(item);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != columns)
      throw ConfigError("corrupt run file " + path.string() + ":" + std::to_string(n) + ": expected " +
                        std::to_string(columns) + " columns");
    rows.push_back(std::move(cells));
  }
  if (header) throw ConfigError("corrupt run file " + path.string() + ": empty");
  return rows;
}

}  // namespace

std::string report_run(const std::string& directory) {
  const fs::path dir = directory;
  const json run = read_json(dir / "run.json");
  const fs::path out = dir / "report";
  fs::create_directories(out);
  std::ostringstream text;
  text << "domain " << run.at("domain").dump() << "\n";
  text << "lambda1 " << format_double(run.at("lambda1")) << ", S " << format_double(run.at("sobolev_S"))
       << ", S^{N/2}/N " << format_double(run.at("energy_quantum")) << "\n";

  const auto cells = read_csv(dir / "summary.csv", 10);
  std::ostringstream heat, bary;
  heat << "lambda,lambda_rel,mu,status,solutions,certified\n";
  bary << "cell,record,seed,class,energy,certified,barycenter,gradient_direction\n";
  text << cells.size() << " cells\n";
  text << "  lambda_rel        mu              status        m+                  m-                  solutions certified\n";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& c = cells[k];
    heat << c[0] << ',' << c[1] << ',' << c[2] << ',' << c[3] << ',' << c[7] << ',' << c[8] << '\n';
    char line[256];
    std::snprintf(line, sizeof line, "  %-17s %-15s %-13s %-19s %-19s %-9s %s\n", c[1].c_str(), c[2].c_str(),
                  c[3].c_str(), c[4].c_str(), c[5].c_str(), c[7].c_str(), c[8].c_str());
    text << line;
    const json cj = read_json(dir / "cells" / (cell_name(k) + ".json"));
    const auto& recs = cj.at("records");
    for (std::size_t r = 0; r < recs.size(); ++r) {
      auto join = [](const json& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i].get<double>());
        return s;
      };
      bary << cell_name(k) << ',' << r << ',' << recs[r].at("seed").get<std::string>() << ','
           << recs[r].at("class").get<std::string>() << ',' << format_double(recs[r].at("energy")) << ','
           << (recs[r].at("certificate").at("overall").get<bool>() ? 1 : 0) << ',' << join(recs[r].at("barycenter"))
           << ',' << join(recs[r].at("gradient_direction")) << '\n';
    }
  }
  write_text(out / "heatmap.csv", heat.str());
  write_text(out / "barycenters.csv", bary.str());

  if (fs::exists(dir / "mu_star.csv")) {
    const auto rows = read_csv(dir / "mu_star.csv", 7);
    std::ostringstream poly;
    poly << "lambda,lambda_rel,mu_star\n";
    text << "mu* boundary, " << rows.size() << " lambda values\n";
    for (const auto& r : rows) {
      if (!r[2].empty()) poly << r[0] << ',' << r[1] << ',' << r[2] << '\n';
      text << "  lambda_rel " << r[1] << "  mu* " << (r[2].empty() ? "(none: " + r[6] + ")" : r[2]) << '\n';
    }
    write_text(out / "boundary.csv", poly.str());
    const auto branch = read_csv(dir / "branches.csv", 7);
    std::ostringstream bc;
    bc << "lambda,mu,energy_plus,energy_minus\n";
    for (const auto& r : branch) bc << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << '\n';
    write_text(out / "branches.csv", bc.str());
  }
  text << "plot data in " << out.string() << "\n";
  return text.str();
}

}  // namespace bnp
