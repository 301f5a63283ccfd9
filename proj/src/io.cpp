#include "presslens/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace presslens::io {

using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(fmt::format("{}: malformed JSON ({})", path.string(), e.what()));
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

template <class T>
T get(const json& j, const char* key, const fs::path& path) {
  if (!j.contains(key)) throw IoError(fmt::format("{}: missing key '{}'", path.string(), key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(fmt::format("{}: bad value for '{}' ({})", path.string(), key, e.what()));
  }
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from(const json& j, const char* key, Eigen::Index expected, const fs::path& path) {
  const auto values = get<std::vector<double>>(j, key, path);
  if (static_cast<Eigen::Index>(values.size()) != expected)
    throw IoError(fmt::format("{}: '{}' has {} entries, expected {}", path.string(), key, values.size(), expected));
  return Eigen::Map<const Vector>(values.data(), expected);
}

void check_mesh(const json& j, const MeshPtr& mesh, const fs::path& path) {
  const auto stored = get<std::string>(j, "mesh_checksum", path);
  const auto actual = checksum_hex(mesh->checksum());
  if (stored != actual)
    throw ChecksumError(fmt::format("{}: mesh checksum {} does not match the supplied mesh ({})", path.string(), stored, actual));
}

json field_header(const char* kind, const MeshPtr& mesh) { return json{{"kind", kind}, {"mesh_checksum", checksum_hex(mesh->checksum())}}; }

void require_kind(const json& j, const char* kind, const fs::path& path) {
  const auto k = get<std::string>(j, "kind", path);
  if (k != kind) throw IoError(fmt::format("{}: expected a {} field, found '{}'", path.string(), kind, k));
}

Eigen::Index velocity_size(const TriangleMesh& m) {
  return static_cast<Eigen::Index>(2 * (m.num_vertices() + m.num_edges()));
}

void write_field_any(const fs::path& p, const ScalarField& f) { write_field(p, f); }
void write_field_any(const fs::path& p, const VectorField& f) { write_field(p, f); }
void write_field_any(const fs::path& p, const DualFunctional& f) { write_field(p, f); }

template <class F>
struct Kind;
template <>
struct Kind<ScalarField> {
  static constexpr const char* name = "scalar";
  static ScalarField read(const fs::path& p, const MeshPtr& m) { return read_scalar_field(p, m); }
};
template <>
struct Kind<VectorField> {
  static constexpr const char* name = "vector";
  static VectorField read(const fs::path& p, const MeshPtr& m) { return read_vector_field(p, m); }
};
template <>
struct Kind<DualFunctional> {
  static constexpr const char* name = "dual";
  static DualFunctional read(const fs::path& p, const MeshPtr& m) { return read_dual_functional(p, m); }
};

void vtk_header(std::ostream& out, const TriangleMesh& mesh) {
  out << "# vtk DataFile Version 3.0\npresslens\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) out << format_double(v.x) << ' ' << format_double(v.y) << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.num_vertices() << '\n';
}

}  // namespace

std::string format_double(double x) { return fmt::format("{}", x); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_mesh(const fs::path& path, const TriangleMesh& mesh) {
  json v = json::array(), t = json::array();
  for (const auto& p : mesh.vertices()) v.push_back({p.x, p.y});
  for (const auto& tri : mesh.triangles()) t.push_back({tri[0], tri[1], tri[2]});
  write_json(path, json{{"kind", "mesh"}, {"checksum", checksum_hex(mesh.checksum())}, {"vertices", v}, {"triangles", t}});
}

MeshPtr read_mesh(const fs::path& path) {
  const json j = read_json(path);
  require_kind(j, "mesh", path);
  std::vector<Point2> vertices;
  std::vector<TriangleIndices> triangles;
  for (const auto& p : get<std::vector<std::array<double, 2>>>(j, "vertices", path)) vertices.push_back({p[0], p[1]});
  for (const auto& t : get<std::vector<std::array<int, 3>>>(j, "triangles", path)) triangles.push_back(t);
  auto mesh = std::make_shared<const TriangleMesh>(std::move(vertices), std::move(triangles));
  const auto stored = get<std::string>(j, "checksum", path);
  if (stored != checksum_hex(mesh->checksum()))
    throw ChecksumError(fmt::format("{}: stored checksum {} does not match its content", path.string(), stored));
  return mesh;
}

void write_field(const fs::path& path, const ScalarField& f) {
  json j = field_header("scalar", f.mesh());
  j["coefficients"] = vector_json(f.coefficients());
  write_json(path, j);
}

void write_field(const fs::path& path, const VectorField& f) {
  json j = field_header("vector", f.mesh());
  j["zero_trace"] = f.zero_trace();
  j["coefficients"] = vector_json(f.coefficients());
  write_json(path, j);
}

void write_field(const fs::path& path, const DualFunctional& f) {
  json j = field_header("dual", f.mesh());
  j["provenance"] = to_string(f.provenance());
  j["load"] = vector_json(f.load());
  write_json(path, j);
}

ScalarField read_scalar_field(const fs::path& path, const MeshPtr& mesh) {
  const json j = read_json(path);
  require_kind(j, "scalar", path);
  check_mesh(j, mesh, path);
  return ScalarField(mesh, vector_from(j, "coefficients", static_cast<Eigen::Index>(mesh->num_vertices()), path));
}

VectorField read_vector_field(const fs::path& path, const MeshPtr& mesh) {
  const json j = read_json(path);
  require_kind(j, "vector", path);
  check_mesh(j, mesh, path);
  return VectorField(mesh, vector_from(j, "coefficients", velocity_size(*mesh), path), get<bool>(j, "zero_trace", path));
}

DualFunctional read_dual_functional(const fs::path& path, const MeshPtr& mesh) {
  const json j = read_json(path);
  require_kind(j, "dual", path);
  check_mesh(j, mesh, path);
  Provenance prov;
  try {
    prov = provenance_from_string(get<std::string>(j, "provenance", path));
  } catch (const std::invalid_argument& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return DualFunctional(mesh, vector_from(j, "load", velocity_size(*mesh), path), prov);
}

std::string field_kind(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "series.json" : path;
  return get<std::string>(read_json(file), "kind", file);
}

template <class F>
void write_series(const fs::path& dir, const TimeSeries<F>& s) {
  fs::create_directories(dir);
  json files = json::array();
  for (int i = 0; i < s.size(); ++i) {
    const std::string name = fmt::format("node_{:04d}.json", i);
    write_field_any(dir / name, s[i]);
    files.push_back(name);
  }
  write_json(dir / "series.json", json{{"kind", Kind<F>::name},
                                       {"a", s.a()},
                                       {"b", s.b()},
                                       {"M", s.size()},
                                       {"mesh_checksum", checksum_hex(s.mesh()->checksum())},
                                       {"files", files}});
}

template <class F>
TimeSeries<F> read_series(const fs::path& dir, const MeshPtr& mesh) {
  const fs::path index = dir / "series.json";
  const json j = read_json(index);
  require_kind(j, Kind<F>::name, index);
  check_mesh(j, mesh, index);
  const auto files = get<std::vector<std::string>>(j, "files", index);
  const int M = get<int>(j, "M", index);
  if (static_cast<int>(files.size()) != M) throw IoError(index.string() + ": file list length differs from M");
  std::vector<F> values;
  values.reserve(M);
  for (const auto& f : files) values.push_back(Kind<F>::read(dir / f, mesh));
  try {
    return TimeSeries<F>(get<double>(j, "a", index), get<double>(j, "b", index), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw IoError(fmt::format("{}: {}", index.string(), e.what()));
  }
}

template void write_series(const fs::path&, const TimeSeries<ScalarField>&);
template void write_series(const fs::path&, const TimeSeries<VectorField>&);
template void write_series(const fs::path&, const TimeSeries<DualFunctional>&);
template TimeSeries<ScalarField> read_series(const fs::path&, const MeshPtr&);
template TimeSeries<VectorField> read_series(const fs::path&, const MeshPtr&);
template TimeSeries<DualFunctional> read_series(const fs::path&, const MeshPtr&);

void write_vtk(const fs::path& path, const ScalarField& f, const std::string& name) {
  std::ostringstream out;
  vtk_header(out, *f.mesh());
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < f.coefficients().size(); ++i) out << format_double(f.coefficients()[i]) << '\n';
  write_text(path, out.str());
}

void write_vtk(const fs::path& path, const VectorField& f, const std::string& name) {
  const auto& mesh = *f.mesh();
  const auto nodes = static_cast<Eigen::Index>(mesh.num_vertices() + mesh.num_edges());
  std::ostringstream out;
  vtk_header(out, mesh);
  out << "VECTORS " << name << " double\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    out << format_double(f.coefficients()[i]) << ' ' << format_double(f.coefficients()[nodes + i]) << " 0\n";
  }
  write_text(path, out.str());
}

}  // namespace presslens::io
