#include "presslens/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "presslens/verify.hpp"

namespace presslens {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> commands = {"mesh", "solve", "project", "decompose", "gns", "verify", "export-vtk"};
const std::set<std::string> corpora = {"bubble", "potential-flow", "taylor-green"};

void allow_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <class T>
T read(const json& j, const char* key, const T& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{} has the wrong type", where, key));
  }
}

Interval read_interval(const json& j, const char* key, Interval fallback, const std::string& where) {
  const auto v = read<std::vector<double>>(j, key, {fallback.lo, fallback.hi}, where);
  if (v.size() != 2) throw ConfigError(fmt::format("{}.{} must be [lo, hi]", where, key));
  return {v[0], v[1]};
}

Point2 read_point(const json& j, const char* key, Point2 fallback, const std::string& where) {
  const auto v = read<std::vector<double>>(j, key, {fallback.x, fallback.y}, where);
  if (v.size() != 2) throw ConfigError(fmt::format("{}.{} must be [x, y]", where, key));
  return {v[0], v[1]};
}

MeshSpec parse_mesh(const json& j) {
  allow_keys(j, {"kind", "x", "y", "n", "center", "radius", "level"}, "mesh");
  MeshSpec m;
  m.kind = read<std::string>(j, "kind", m.kind, "mesh");
  m.x = read_interval(j, "x", m.x, "mesh");
  m.y = read_interval(j, "y", m.y, "mesh");
  m.n = read<int>(j, "n", m.n, "mesh");
  m.center = read_point(j, "center", m.center, "mesh");
  m.radius = read<double>(j, "radius", m.radius, "mesh");
  m.level = read<int>(j, "level", m.level, "mesh");
  return m;
}

RegionSpec parse_region(const json& j, const std::string& where) {
  allow_keys(j, {"kind", "x", "y", "center", "radius"}, where);
  RegionSpec r;
  r.kind = read<std::string>(j, "kind", r.kind, where);
  r.x = read_interval(j, "x", r.x, where);
  r.y = read_interval(j, "y", r.y, where);
  r.center = read_point(j, "center", r.center, where);
  r.radius = read<double>(j, "radius", r.radius, where);
  return r;
}

bool positive(double x) { return std::isfinite(x) && x > 0; }

void validate_interval(Interval i, const std::string& what) {
  if (!std::isfinite(i.lo) || !std::isfinite(i.hi) || !(i.lo < i.hi)) throw ConfigError(what + " must satisfy lo < hi");
}

void validate_region(const RegionSpec& r, const std::string& where) {
  if (r.kind == "all") return;
  if (r.kind == "box") {
    validate_interval(r.x, where + ".x");
    validate_interval(r.y, where + ".y");
  } else if (r.kind == "disk") {
    if (!positive(r.radius)) throw ConfigError(where + ".radius must be positive");
  } else {
    throw ConfigError(fmt::format("{}.kind '{}' is not one of all, box, disk", where, r.kind));
  }
}

json region_json(const RegionSpec& r) {
  if (r.kind == "box") return {{"kind", "box"}, {"x", {r.x.lo, r.x.hi}}, {"y", {r.y.lo, r.y.hi}}};
  if (r.kind == "disk") return {{"kind", "disk"}, {"center", {r.center.x, r.center.y}}, {"radius", r.radius}};
  return {{"kind", r.kind}};
}

}  // namespace

void validate(const RunConfig& c) {
  if (!c.command.empty() && !commands.count(c.command)) throw ConfigError("unknown command '" + c.command + "'");
  if (c.mesh) {
    const auto& m = *c.mesh;
    if (m.kind == "rect") {
      if (m.n < 1) throw ConfigError(fmt::format("mesh.n must be at least 1, got {}", m.n));
      validate_interval(m.x, "mesh.x");
      validate_interval(m.y, "mesh.y");
    } else if (m.kind == "disk") {
      if (m.level < 0) throw ConfigError("mesh.level must be nonnegative");
      if (!positive(m.radius)) throw ConfigError("mesh.radius must be positive");
    } else {
      throw ConfigError("mesh.kind '" + m.kind + "' is not one of rect, disk");
    }
  }
  if (c.levels < 1) throw ConfigError("levels must be at least 1");
  if (c.levels > 8) throw ConfigError("levels must be at most 8");
  if (c.time) {
    if (c.time->M < 2) throw ConfigError(fmt::format("time.M must be at least 2, got {}", c.time->M));
    if (!std::isfinite(c.time->a) || !std::isfinite(c.time->b) || !(c.time->a < c.time->b))
      throw ConfigError("time grid must satisfy a < b");
  }
  if (c.delta != 0 && c.delta != 1) throw ConfigError("delta must be 0 or 1");
  if (c.q.empty()) throw ConfigError("q list must not be empty");
  for (double q : c.q) {
    if (!std::isfinite(q) || !(q > 1)) throw ConfigError(fmt::format("q values must lie in (1, inf), got {}", q));
  }
  if (c.G) validate_region(*c.G, "G");
  validate_region(c.U, "U");
  if (!corpora.count(c.corpus)) throw ConfigError("corpus.case '" + c.corpus + "' is not one of bubble, potential-flow, taylor-green");
  if (!positive(c.viscosity)) throw ConfigError("corpus.viscosity must be positive");
  if (c.test_bank != "riesz" && c.test_bank != "curl-bubble") throw ConfigError("test_bank.kind must be riesz or curl-bubble");
  if (c.bank_size < 1) throw ConfigError("test_bank.size must be at least 1");
  if (!positive(c.tolerances.gate)) throw ConfigError("tolerances.gate must be positive");
  if (!positive(c.tolerances.split)) throw ConfigError("tolerances.split must be positive");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  for (const auto& name : c.checks) {
    const auto& all = verify::check_names();
    if (std::find(all.begin(), all.end(), name) == all.end()) throw ConfigError("unknown check '" + name + "'");
  }
}

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  allow_keys(j, {"command", "mesh", "levels", "time", "refine_time", "delta", "q", "G", "U", "corpus", "test_bank",
                 "tolerances", "output", "threads", "checks", "mesh_file", "input"},
             "config");
  RunConfig c;
  c.command = read<std::string>(j, "command", "", "config");
  if (j.contains("mesh")) c.mesh = parse_mesh(j["mesh"]);
  c.levels = read<int>(j, "levels", c.levels, "config");
  if (j.contains("time")) {
    allow_keys(j["time"], {"a", "b", "M"}, "time");
    TimeGrid t;
    t.a = read<double>(j["time"], "a", t.a, "time");
    t.b = read<double>(j["time"], "b", t.b, "time");
    t.M = read<int>(j["time"], "M", t.M, "time");
    c.time = t;
  }
  c.refine_time = read<bool>(j, "refine_time", c.refine_time, "config");
  c.delta = read<int>(j, "delta", c.delta, "config");
  c.q = read<std::vector<double>>(j, "q", c.q, "config");
  if (j.contains("G")) c.G = parse_region(j["G"], "G");
  if (j.contains("U")) c.U = parse_region(j["U"], "U");
  if (j.contains("corpus")) {
    allow_keys(j["corpus"], {"case", "viscosity"}, "corpus");
    c.corpus = read<std::string>(j["corpus"], "case", c.corpus, "corpus");
    c.viscosity = read<double>(j["corpus"], "viscosity", c.viscosity, "corpus");
  }
  if (j.contains("test_bank")) {
    allow_keys(j["test_bank"], {"kind", "size"}, "test_bank");
    c.test_bank = read<std::string>(j["test_bank"], "kind", c.test_bank, "test_bank");
    c.bank_size = read<int>(j["test_bank"], "size", c.bank_size, "test_bank");
  }
  if (j.contains("tolerances")) {
    allow_keys(j["tolerances"], {"gate", "split"}, "tolerances");
    c.tolerances.gate = read<double>(j["tolerances"], "gate", c.tolerances.gate, "tolerances");
    c.tolerances.split = read<double>(j["tolerances"], "split", c.tolerances.split, "tolerances");
  }
  auto resolve = [&](const fs::path& p) { return p.empty() || p.is_absolute() ? p : base_dir / p; };
  c.output = resolve(read<std::string>(j, "output", c.output.string(), "config"));
  c.threads = read<int>(j, "threads", c.threads, "config");
  c.checks = read<std::vector<std::string>>(j, "checks", {}, "config");
  c.mesh_file = resolve(read<std::string>(j, "mesh_file", "", "config"));
  c.input = resolve(read<std::string>(j, "input", "", "config"));
  validate(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed config {}: {}", path.string(), e.what()));
  }
  return parse_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  json j = {{"command", c.command}, {"levels", c.levels}, {"refine_time", c.refine_time}, {"delta", c.delta}, {"q", c.q},
            {"U", region_json(c.U)}, {"corpus", {{"case", c.corpus}, {"viscosity", c.viscosity}}},
            {"test_bank", {{"kind", c.test_bank}, {"size", c.bank_size}}},
            {"tolerances", {{"gate", c.tolerances.gate}, {"split", c.tolerances.split}}}, {"threads", c.threads}};
  if (c.mesh) {
    const auto& m = *c.mesh;
    j["mesh"] = m.kind == "disk" ? json{{"kind", "disk"}, {"center", {m.center.x, m.center.y}}, {"radius", m.radius}, {"level", m.level}}
                                 : json{{"kind", "rect"}, {"x", {m.x.lo, m.x.hi}}, {"y", {m.y.lo, m.y.hi}}, {"n", m.n}};
  }
  if (c.time) j["time"] = {{"a", c.time->a}, {"b", c.time->b}, {"M", c.time->M}};
  if (c.G) j["G"] = region_json(*c.G);
  if (!c.checks.empty()) j["checks"] = c.checks;
  return j;
}

MeshPtr build_mesh(const MeshSpec& spec, int level_offset) {
  if (spec.kind == "disk") return generate_disk_mesh(spec.center, spec.radius, spec.level + level_offset);
  return generate_rect_mesh(spec.x, spec.y, spec.n << level_offset);
}

std::function<bool(Point2)> region_predicate(const RegionSpec& spec) {
  if (spec.kind == "box") {
    return [s = spec](Point2 p) { return p.x > s.x.lo && p.x < s.x.hi && p.y > s.y.lo && p.y < s.y.hi; };
  }
  if (spec.kind == "disk") {
    return [s = spec](Point2 p) { return dot(p - s.center, p - s.center) < s.radius * s.radius; };
  }
  return [](Point2) { return true; };
}

}  // namespace presslens
