#include "bnp/records.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "bnp/errors.hpp"

namespace bnp {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw ArgumentError("cannot format number");
  return std::string(buf, ptr);
}

json to_json(const DomainSpec& d) {
  json j{{"dimension", d.dimension}, {"resolution", d.resolution}};
  if (d.shape == Shape::Box) {
    j["shape"] = "box";
    j["sides"] = d.sides;
  } else {
    j["shape"] = "annulus";
    j["delta0"] = d.delta0;
  }
  return j;
}

DomainSpec domain_from_json(const json& j) {
  try {
    const std::string shape = j.at("shape");
    const int dim = j.at("dimension");
    const int res = j.at("resolution");
    if (shape == "box") return DomainSpec::box(dim, j.at("sides").get<std::vector<double>>(), res);
    if (shape == "annulus") return DomainSpec::annulus(dim, j.at("delta0"), res);
    throw ConfigError("unknown domain shape '" + shape + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed domain: ") + e.what());
  }
}

json to_json(const BoundaryData& g) {
  switch (g.kind) {
    case BoundaryData::Kind::Constant:
      return {{"kind", "constant"}, {"value", g.constant}};
    case BoundaryData::Kind::BumpOnBoundary:
      return {{"kind", "bump"}, {"direction", g.direction}, {"width", g.width}, {"amplitude", g.amplitude}};
    case BoundaryData::Kind::NodeTable:
      return {{"kind", "table"}, {"values", g.table}};
  }
  return {};
}

BoundaryData boundary_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind");
    if (kind == "constant") return BoundaryData::make_constant(j.at("value"));
    if (kind == "bump")
      return BoundaryData::bump(j.at("direction").get<std::vector<double>>(), j.at("width"), j.at("amplitude"));
    if (kind == "table") return BoundaryData::node_table(j.at("values").get<std::vector<double>>());
    throw ConfigError("unknown boundary kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed boundary data: ") + e.what());
  }
}

json to_json(const SolutionRecord& r) {
  json j{{"lambda", r.lambda},
         {"mu", r.mu},
         {"energy", r.energy},
         {"class", to_string(r.nehari_class.kind)},
         {"grad_norm", r.grad_norm},
         {"positive", r.positive},
         {"converged", r.converged},
         {"seed", to_string(r.seed)},
         {"barycenter", r.barycenter},
         {"gradient_direction", r.gradient_direction},
         {"iterations", r.iterations},
         {"t_first_deriv", r.nehari_class.t_first_deriv},
         {"t_second_deriv", r.nehari_class.t_second_deriv},
         {"h1_norm", std::sqrt(h1_seminorm_sq(r.v))}};
  if (!r.seed_direction.empty()) j["seed_direction"] = r.seed_direction;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json stored_record_json(const SolutionRecord& r, const DomainSpec& d, const BoundaryData& g,
                        const std::string& field_path) {
  json j = to_json(r);
  j["domain"] = to_json(d);
  j["boundary"] = to_json(g);
  j["field"] = field_path;
  return j;
}

StoredRecord read_stored_record(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open record file " + path);
  StoredRecord s;
  try {
    is >> s.raw;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": not valid JSON: " + e.what());
  }
  try {
    s.domain = domain_from_json(s.raw.at("domain"));
    s.boundary = boundary_from_json(s.raw.at("boundary"));
    s.lambda = s.raw.at("lambda");
    s.mu = s.raw.at("mu");
    s.seed = seed_kind_from_string(s.raw.at("seed"));
    std::filesystem::path f = s.raw.at("field").get<std::string>();
    if (f.is_relative()) f = std::filesystem::path(path).parent_path() / f;
    s.field_path = f.string();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": missing or malformed entry: " + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return s;
}

}  // namespace bnp
