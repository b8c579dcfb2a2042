#include <doctest.h>
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bnp/errors.hpp"
#include "bnp/records.hpp"
#include "bnp/sweep.hpp"

using namespace bnp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bnp_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

RunConfig small_config(const fs::path& out, const std::string& lambdas, const std::string& searches) {
  std::istringstream is("[domain]\nshape = box\ndimension = 3\nresolution = 9\n"
                        "[parameters]\nlambda_rel = " + lambdas + "\nmu = 0.01\n"
                        "[search]\nsearches = " + searches + "\n"
                        "[mu_star]\nmax_solves = 25\n"
                        "[output]\ndirectory = " + out.string() + "\ndump_fields = true\n");
  return parse_config(is, "sweep.cfg");
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("a solved cell and a nonexistence cell") {
    const RunConfig cfg = small_config(scratch("cells"), "0.5, 1.2", "nplus, nminus");
    const RunContext ctx = build_context(cfg);
    const RunResult res = run_sweep(ctx, cfg);
    REQUIRE(res.cells.size() == 2);
    const auto& solved = res.cells[0];
    CHECK(solved.status == "solved");
    CHECK(solved.certified() == 2);
    REQUIRE(solved.m_plus().has_value());
    REQUIRE(solved.m_minus().has_value());
    CHECK(*solved.m_plus() < 0.0);
    CHECK(*solved.m_minus() > 0.0);
    REQUIRE(solved.thresholds.has_value());
    CHECK(solved.thresholds->overall);

    const auto& none = res.cells[1];
    CHECK(none.status == "nonexistence");
    REQUIRE(none.nonexistence.has_value());
    CHECK(none.nonexistence->overall);
    CHECK(none.certified() == 0);

    write_run(res, ctx, cfg);
    const fs::path dir = cfg.output_directory;
    for (const char* f : {"run.json", "summary.csv", "cells/cell_0000.json", "cells/cell_0001.json"})
      CHECK(fs::exists(dir / f));
    const std::string text = report_run(dir.string());
    CHECK(text.find("2 cells") != std::string::npos);
    CHECK(fs::exists(dir / "report" / "heatmap.csv"));

    // stored records re-read and point at their field dumps
    bool any = false;
    for (const auto& e : fs::directory_iterator(dir / "records")) {
      const StoredRecord s = read_stored_record(e.path().string());
      CHECK(fs::exists(s.field_path));
      CHECK(s.lambda == doctest::Approx(0.5 * res.lambda1));
      any = true;
    }
    CHECK(any);
  }

  TEST_CASE("outputs do not depend on the thread count") {
    const int saved = omp_get_max_threads();
    std::vector<std::string> outputs;
    for (int threads : {1, 4}) {
      omp_set_num_threads(threads);
      const RunConfig cfg =
          small_config(scratch("det" + std::to_string(threads)), "0.25, 0.5", "nplus, nminus, mu_star");
      const RunContext ctx = build_context(cfg);
      write_run(run_sweep(ctx, cfg), ctx, cfg);
      const fs::path dir = cfg.output_directory;
      outputs.push_back(slurp(dir / "summary.csv") + slurp(dir / "mu_star.csv") + slurp(dir / "branches.csv"));
    }
    omp_set_num_threads(saved);
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0].find("lambda,lambda_rel,mu_star") != std::string::npos);
  }

  TEST_CASE("report errors") {
    const fs::path empty = scratch("empty");
    CHECK_THROWS_AS(report_run(empty.string()), ConfigError);
    std::ofstream(empty / "run.json") << "{ not json";
    CHECK_THROWS_AS(report_run(empty.string()), ConfigError);
  }
}
