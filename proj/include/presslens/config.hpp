#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "presslens/mesh.hpp"

namespace presslens {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MeshSpec {
  /// "rect" or "disk".
  std::string kind = "rect";
  Interval x{0, 1};
  Interval y{0, 1};
  int n = 8;
  Point2 center{0, 0};
  double radius = 1.0;
  int level = 3;
};

/// Triangles are selected by their centroids.
struct RegionSpec {
  /// "all", "box" or "disk".
  std::string kind = "all";
  Interval x{0, 1};
  Interval y{0, 1};
  Point2 center{0, 0};
  double radius = 1.0;
};

struct TimeGrid {
  double a = 0.0;
  double b = 1.0;
  int M = 9;
};

struct Tolerances {
  /// Relative tolerance of the annihilation gate before decomposing.
  double gate = 5e-2;
  /// Linearity split criterion, relative to the largest nodal |p_0|.
  double split = 1e-11;
};

struct RunConfig {
  std::string command;
  /// Unset: the corpus case's own domain.
  std::optional<MeshSpec> mesh;
  /// Number of uniformly refined levels, starting from the mesh spec.
  int levels = 1;
  /// Unset: the corpus case's own time interval.
  std::optional<TimeGrid> time;
  /// Double M together with the mesh (M -> 2M - 1) on every level.
  bool refine_time = false;
  int delta = 0;
  std::vector<double> q = {2.0};
  /// G on the solve mesh and U relative to G. Unset G: the corpus default window.
  std::optional<RegionSpec> G;
  RegionSpec U;
  /// "bubble", "potential-flow" or "taylor-green".
  std::string corpus = "potential-flow";
  double viscosity = 1.0;
  /// "riesz" or "curl-bubble".
  std::string test_bank = "riesz";
  int bank_size = 6;
  Tolerances tolerances;
  std::filesystem::path output = "presslens-out";
  int threads = 1;
  /// verify: names of the checks to run (empty: all).
  std::vector<std::string> checks;
  /// export-vtk: a mesh file and a field file or series directory.
  std::filesystem::path mesh_file;
  std::filesystem::path input;
};

/// Parses and validates; relative paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
/// Throws ConfigError on any violated invariant.
void validate(const RunConfig& c);
nlohmann::json to_json(const RunConfig& c);

MeshPtr build_mesh(const MeshSpec& spec, int level_offset = 0);
std::function<bool(Point2)> region_predicate(const RegionSpec& spec);

}  // namespace presslens
