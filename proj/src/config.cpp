#include "bnp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bnp/errors.hpp"

namespace bnp {

std::string to_string(Search s) {
  switch (s) {
    case Search::NPlus: return "nplus";
    case Search::NMinus: return "nminus";
    case Search::Multistart: return "multistart";
    case Search::Minimax: return "minimax";
    case Search::MuStar: return "mu_star";
  }
  return "?";
}

std::vector<double> RunConfig::absolute_lambdas(double lambda1) const {
  std::vector<double> out = lambdas;
  if (lambda_relative)
    for (double& l : out) l *= lambda1;
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

double to_number(const std::string& t) {
  double v = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError("not a number: '" + t + "'");
  return v;
}

int to_int(const std::string& t) {
  const double v = to_number(t);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("not an integer: '" + t + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& t) {
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ConfigError("not a boolean: '" + t + "'");
}

struct Entry {
  std::string value;
  int line;
};

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty list");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError("range needs start:stop:count, got '" + t + "'");
    const double a = to_number(parts[0]), b = to_number(parts[1]);
    const int n = to_int(parts[2]);
    if (n < 1) throw ConfigError("range count must be positive in '" + t + "'");
    if (n == 1) return {a};
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * k / (n - 1));
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split(t, ',')) out.push_back(to_number(item));
  return out;
}

RunConfig parse_config(std::istream& is, const std::string& source) {
  // section.key -> value, line
  std::map<std::string, Entry> entries;
  static const std::map<std::string, std::set<std::string>> known = {
      {"domain", {"shape", "dimension", "resolution", "side", "sides", "delta0"}},
      {"boundary", {"kind", "value", "direction", "width", "amplitude", "file"}},
      {"parameters", {"lambda", "lambda_rel", "mu"}},
      {"search", {"searches", "epsilons", "directions", "budget_factor"}},
      {"mu_star", {"mu_start", "step_start", "min_step_rel", "max_solves", "track_minus"}},
      {"output", {"directory", "dump_fields", "seed"}},
  };
  auto fail = [&](int line, const std::string& msg) -> ConfigError {
    return ConfigError(source + ":" + std::to_string(line) + ": " + msg);
  };

  std::string section, raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = raw.substr(0, raw.find('#'));
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!known.count(section)) throw fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw fail(line, "expected key = value");
    if (section.empty()) throw fail(line, "key outside any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!known.at(section).count(key)) throw fail(line, "unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) throw fail(line, "empty value for '" + key + "'");
    const std::string full = section + "." + key;
    if (entries.count(full)) throw fail(line, "duplicate key '" + key + "'");
    entries[full] = {value, line};
  }

  // typed access with the line number attached to conversion errors
  auto get = [&](const std::string& k) -> const Entry* {
    const auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto convert = [&](const std::string& k, auto fn) {
    const Entry* e = get(k);
    try {
      return fn(e->value);
    } catch (const ConfigError& err) {
      throw fail(e->line, k + ": " + err.what());
    }
  };
  auto require = [&](const std::string& k, int context_line) -> const Entry& {
    const Entry* e = get(k);
    if (!e) throw fail(context_line, "missing required key '" + k + "'");
    return *e;
  };
  const int last_line = line;

  RunConfig cfg;
  {
    const Entry& shape = require("domain.shape", last_line);
    const int dim = get("domain.dimension") ? convert("domain.dimension", to_int) : 3;
    (void)require("domain.resolution", shape.line);
    const int res = convert("domain.resolution", to_int);
    if (shape.value != "box" && shape.value != "annulus") throw fail(shape.line, "shape must be box or annulus");
    if (shape.value == "annulus") (void)require("domain.delta0", shape.line);
    std::vector<double> sides;
    if (get("domain.sides")) {
      sides = convert("domain.sides", parse_number_list);
    } else {
      const double side = get("domain.side") ? convert("domain.side", to_number) : 1.0;
      sides.assign(static_cast<std::size_t>(std::clamp(dim, 0, 16)), side);
    }
    const double delta0 = shape.value == "annulus" ? convert("domain.delta0", to_number) : 0.0;
    try {
      cfg.domain = shape.value == "box" ? DomainSpec::box(dim, sides, res) : DomainSpec::annulus(dim, delta0, res);
      cfg.domain.validate();
    } catch (const ConfigError& err) {
      throw fail(shape.line, err.what());
    }
  }

  {
    const Entry* kind = get("boundary.kind");
    const std::string k = kind ? kind->value : "constant";
    const int kl = kind ? kind->line : last_line;
    if (k == "constant") {
      cfg.boundary = BoundaryData::make_constant(get("boundary.value") ? convert("boundary.value", to_number) : 1.0);
    } else if (k == "bump") {
      (void)require("boundary.direction", kl);
      const auto dir = convert("boundary.direction", parse_number_list);
      cfg.boundary = BoundaryData::bump(dir, get("boundary.width") ? convert("boundary.width", to_number) : 0.5,
                                        get("boundary.amplitude") ? convert("boundary.amplitude", to_number) : 1.0);
    } else if (k == "table") {
      // the table is read once the domain is built and its boundary is known
      cfg.boundary_table_path = require("boundary.file", kl).value;
      cfg.boundary.kind = BoundaryData::Kind::NodeTable;
    } else {
      throw fail(kl, "boundary kind must be constant, bump or table");
    }
  }

  {
    const Entry* abs = get("parameters.lambda");
    const Entry* rel = get("parameters.lambda_rel");
    if (abs && rel) throw fail(rel->line, "give lambda or lambda_rel, not both");
    if (!abs && !rel) throw fail(last_line, "missing required key 'parameters.lambda' or 'parameters.lambda_rel'");
    const std::string key = abs ? "parameters.lambda" : "parameters.lambda_rel";
    cfg.lambda_relative = rel != nullptr;
    cfg.lambdas = convert(key, parse_number_list);
    for (double l : cfg.lambdas)
      if (!(l > 0.0)) throw fail(get(key)->line, "every lambda must be positive");
    const Entry& mu = require("parameters.mu", last_line);
    cfg.mus = convert("parameters.mu", parse_number_list);
    for (double m : cfg.mus)
      if (!(m >= 0.0)) throw fail(mu.line, "every mu must be nonnegative");
  }

  {
    const Entry& s = require("search.searches", last_line);
    for (const auto& item : split(s.value, ',')) {
      if (item == "nplus") cfg.searches.insert(Search::NPlus);
      else if (item == "nminus") cfg.searches.insert(Search::NMinus);
      else if (item == "multistart") cfg.searches.insert(Search::Multistart);
      else if (item == "minimax") cfg.searches.insert(Search::Minimax);
      else if (item == "mu_star") cfg.searches.insert(Search::MuStar);
      else if (!item.empty()) throw fail(s.line, "unknown search '" + item + "'");
    }
    if (cfg.searches.empty()) throw fail(s.line, "searches must name at least one search");
    if (get("search.epsilons")) {
      cfg.epsilons = convert("search.epsilons", parse_number_list);
      for (double e : cfg.epsilons)
        if (!(e > 0.0 && e < 1.0)) throw fail(get("search.epsilons")->line, "epsilons must lie in (0, 1)");
    }
    const int full = 2 * cfg.domain.dimension;
    cfg.directions = get("search.directions") ? convert("search.directions", to_int) : full;
    if (cfg.directions < 1 || cfg.directions > full)
      throw fail(get("search.directions")->line, "directions must lie in [1, " + std::to_string(full) + "]");
    if (get("search.budget_factor")) {
      cfg.budget_factor = convert("search.budget_factor", to_int);
      if (cfg.budget_factor < 1) throw fail(get("search.budget_factor")->line, "budget_factor must be >= 1");
    }
    const bool annular = cfg.domain.shape == Shape::AnnulusD;
    if ((cfg.has(Search::Multistart) || cfg.has(Search::Minimax)) && !annular)
      throw fail(s.line, "multistart and minimax need an annulus domain");
  }

  if (get("mu_star.mu_start")) cfg.continuation.mu_start = convert("mu_star.mu_start", to_number);
  if (get("mu_star.step_start")) cfg.continuation.step_start = convert("mu_star.step_start", to_number);
  if (get("mu_star.min_step_rel")) cfg.continuation.min_step_rel = convert("mu_star.min_step_rel", to_number);
  if (get("mu_star.max_solves")) cfg.continuation.max_solves = convert("mu_star.max_solves", to_int);
  if (get("mu_star.track_minus")) cfg.continuation.track_minus = convert("mu_star.track_minus", to_bool);
  if (!(cfg.continuation.mu_start > 0.0 && cfg.continuation.step_start > 0.0 &&
        cfg.continuation.min_step_rel > 0.0 && cfg.continuation.max_solves > 0))
    throw fail(get("mu_star.mu_start") ? get("mu_star.mu_start")->line : last_line,
               "mu_star settings must be positive");

  if (get("output.directory")) cfg.output_directory = get("output.directory")->value;
  if (get("output.dump_fields")) cfg.dump_fields = convert("output.dump_fields", to_bool);
  if (get("output.seed")) {
    const int sd = convert("output.seed", to_int);
    if (sd < 0) throw fail(get("output.seed")->line, "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(sd);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  RunConfig cfg = parse_config(is, path);
  const auto dir = std::filesystem::path(path).parent_path();
  cfg.base_directory = dir.empty() ? "." : dir.string();
  return cfg;
}

}  // namespace bnp
