#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "presslens/io.hpp"
#include "support.hpp"

using namespace presslens;
using namespace presslens::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "presslens_test_io" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// Doubles spread over many binades, plus awkward decimals.
double awkward_double(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mant(-1, 1);
  std::uniform_int_distribution<int> expo(-300, 300);
  switch (rng() % 4) {
    case 0: return mant(rng);
    case 1: return std::ldexp(mant(rng), expo(rng));
    case 2: return 1.0 / static_cast<double>(1 + rng() % 1000);
    default: return std::nextafter(mant(rng), 2.0);
  }
}

}  // namespace

TEST_CASE("format_double round-trips (property)") {
  std::mt19937_64 rng(71);
  for (int k = 0; k < 5000; ++k) {
    const double x = awkward_double(rng);
    CHECK(std::strtod(io::format_double(x).c_str(), nullptr) == x);
  }
  CHECK(io::format_double(0.1) == "0.1");
  const double tiny = std::numeric_limits<double>::denorm_min();
  CHECK(std::strtod(io::format_double(tiny).c_str(), nullptr) == tiny);
}

TEST_CASE("mesh files round-trip and verify their checksum") {
  const auto dir = scratch("mesh");
  for (const auto& mesh : {generate_rect_mesh({0, 1}, {-0.3, 0.7}, 5), generate_disk_mesh({0.1, -0.2}, 0.7, 2)}) {
    io::write_mesh(dir / "m.json", *mesh);
    const auto back = io::read_mesh(dir / "m.json");
    CHECK(back->checksum() == mesh->checksum());
    CHECK(back->triangles() == mesh->triangles());
    for (std::size_t i = 0; i < mesh->num_vertices(); ++i) CHECK(back->vertices()[i] == mesh->vertices()[i]);
  }

  // a tampered coordinate no longer matches the stored checksum
  auto text = io::read_text(dir / "m.json");
  const auto pos = text.find("\"vertices\"");
  REQUIRE(pos != std::string::npos);
  const auto digit = text.find_first_of("123456789", pos);
  text[digit] = text[digit] == '9' ? '8' : static_cast<char>(text[digit] + 1);
  io::write_text(dir / "tampered.json", text);
  CHECK_THROWS_AS(io::read_mesh(dir / "tampered.json"), io::ChecksumError);

  CHECK_THROWS_AS(io::read_mesh(dir / "missing.json"), io::IoError);
  io::write_text(dir / "bad.json", "{ not json");
  CHECK_THROWS_AS(io::read_mesh(dir / "bad.json"), io::IoError);
  io::write_text(dir / "nokey.json", R"({"kind": "mesh", "vertices": []})");
  CHECK_THROWS_AS(io::read_mesh(dir / "nokey.json"), io::IoError);
}

TEST_CASE("field files round-trip bit for bit") {
  std::mt19937_64 rng(73);
  const auto dir = scratch("field");
  auto mesh = generate_rect_mesh({0, 1}, {0, 1}, 3);
  Vector ps(mesh->num_vertices());
  for (Eigen::Index i = 0; i < ps.size(); ++i) ps[i] = awkward_double(rng);
  const ScalarField p(mesh, ps);
  const auto v = random_zero_trace(mesh, rng);
  const VectorField w(mesh, random_zero_trace(mesh, rng).coefficients(), false);
  const auto f = mass_embed(v);

  io::write_field(dir / "p.json", p);
  io::write_field(dir / "v.json", v);
  io::write_field(dir / "w.json", w);
  io::write_field(dir / "f.json", f);
  CHECK(same_bits(io::read_scalar_field(dir / "p.json", mesh).coefficients(), p.coefficients()));
  const auto v2 = io::read_vector_field(dir / "v.json", mesh);
  CHECK(same_bits(v2.coefficients(), v.coefficients()));
  CHECK(v2.zero_trace());
  CHECK_FALSE(io::read_vector_field(dir / "w.json", mesh).zero_trace());
  const auto f2 = io::read_dual_functional(dir / "f.json", mesh);
  CHECK(same_bits(f2.load(), f.load()));
  CHECK(f2.provenance() == f.provenance());
  CHECK(io::field_kind(dir / "f.json") == "dual");

  // writing the read value again gives the same bytes
  io::write_field(dir / "p2.json", io::read_scalar_field(dir / "p.json", mesh));
  CHECK(io::read_text(dir / "p2.json") == io::read_text(dir / "p.json"));

  auto other = generate_rect_mesh({0, 1}, {0, 1}, 4);
  CHECK_THROWS_AS(io::read_scalar_field(dir / "p.json", other), io::ChecksumError);
  auto shifted = generate_rect_mesh({0, 1.000001}, {0, 1}, 3);
  CHECK_THROWS_AS(io::read_vector_field(dir / "v.json", shifted), io::ChecksumError);
  // wrong kind is an I/O error, not a checksum error
  try {
    (void)io::read_vector_field(dir / "p.json", mesh);
    FAIL("expected an error");
  } catch (const io::ChecksumError&) {
    FAIL("kind mismatch reported as checksum error");
  } catch (const io::IoError&) {
  }
}

TEST_CASE("series directories round-trip") {
  std::mt19937_64 rng(79);
  const auto dir = scratch("series");
  auto mesh = generate_rect_mesh({0, 1}, {0, 1}, 2);
  std::vector<ScalarField> ps;
  std::vector<VectorField> vs;
  for (int i = 0; i < 5; ++i) {
    ps.push_back(random_p1(mesh, rng));
    vs.push_back(random_zero_trace(mesh, rng));
  }
  const TimeSeries<ScalarField> sp(0.1, 0.7, ps);
  const TimeSeries<VectorField> sv(-1.0, 2.0, vs);
  const auto sf = map_series<DualFunctional>(sv, [](const VectorField& v) { return mass_embed(v); });
  io::write_series(dir / "p", sp);
  io::write_series(dir / "v", sv);
  io::write_series(dir / "f", sf);

  const auto bp = io::read_series<ScalarField>(dir / "p", mesh);
  CHECK(bp.a() == sp.a());
  CHECK(bp.b() == sp.b());
  REQUIRE(bp.size() == sp.size());
  for (int i = 0; i < sp.size(); ++i) {
    CHECK(bp.time(i) == sp.time(i));
    CHECK(same_bits(bp[i].coefficients(), sp[i].coefficients()));
  }
  const auto bv = io::read_series<VectorField>(dir / "v", mesh);
  for (int i = 0; i < sv.size(); ++i) CHECK(same_bits(bv[i].coefficients(), sv[i].coefficients()));
  const auto bf = io::read_series<DualFunctional>(dir / "f", mesh);
  for (int i = 0; i < sf.size(); ++i) CHECK(same_bits(bf[i].load(), sf[i].load()));
  CHECK(io::field_kind(dir / "v") == "vector");

  CHECK_THROWS_AS(io::read_series<VectorField>(dir / "p", mesh), io::IoError);
  CHECK_THROWS_AS(io::read_series<ScalarField>(dir / "p", generate_rect_mesh({0, 1}, {0, 1}, 3)), io::ChecksumError);
  fs::remove(dir / "p" / "node_0002.json");
  CHECK_THROWS_AS(io::read_series<ScalarField>(dir / "p", mesh), io::IoError);
}

TEST_CASE("legacy VTK output") {
  const auto dir = scratch("vtk");
  auto mesh = generate_rect_mesh({0, 2}, {0, 1}, 2);
  const auto p = interpolate_scalar(mesh, [](Point2 x) { return x.x + 10 * x.y; });
  const auto u = interpolate_vector(mesh, [](Point2 x) { return std::array<double, 2>{x.y, -x.x}; });
  io::write_vtk(dir / "p.vtk", p);
  io::write_vtk(dir / "u.vtk", u, "velocity");

  std::istringstream in(io::read_text(dir / "p.vtk"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "ASCII");
  std::getline(in, line);
  CHECK(line == "DATASET UNSTRUCTURED_GRID");
  std::string word, type;
  std::size_t count = 0;
  in >> word >> count >> type;
  CHECK(word == "POINTS");
  CHECK(count == mesh->num_vertices());
  for (std::size_t i = 0; i < count; ++i) {
    double x, y, z;
    in >> x >> y >> z;
    CHECK(x == mesh->vertices()[i].x);
    CHECK(y == mesh->vertices()[i].y);
    CHECK(z == 0.0);
  }
  std::size_t cells = 0, size = 0;
  in >> word >> cells >> size;
  CHECK(word == "CELLS");
  CHECK(cells == mesh->num_triangles());
  CHECK(size == 4 * cells);
  for (std::size_t t = 0; t < cells; ++t) {
    int n, a, b, c;
    in >> n >> a >> b >> c;
    CHECK(n == 3);
    CHECK(mesh->triangles()[t] == TriangleIndices{a, b, c});
  }
  in >> word >> cells;
  CHECK(word == "CELL_TYPES");
  for (std::size_t t = 0; t < cells; ++t) {
    int ct;
    in >> ct;
    CHECK(ct == 5);
  }
  in >> word >> count;
  CHECK(word == "POINT_DATA");
  CHECK(count == mesh->num_vertices());
  std::string name, components, table;
  in >> word >> name >> type >> components;
  CHECK(word == "SCALARS");
  CHECK(name == "p");
  CHECK(components == "1");
  in >> table >> word;
  CHECK(table == "LOOKUP_TABLE");
  CHECK(word == "default");
  for (std::size_t i = 0; i < count; ++i) {
    double v;
    in >> v;
    CHECK(v == p.coefficients()[i]);
  }

  const auto text = io::read_text(dir / "u.vtk");
  const auto pos = text.find("VECTORS velocity double\n");
  REQUIRE(pos != std::string::npos);
  std::istringstream vin(text.substr(pos + std::strlen("VECTORS velocity double\n")));
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
    double a, b, c;
    vin >> a >> b >> c;
    CHECK(a == doctest::Approx(mesh->vertices()[i].y).epsilon(1e-15));
    CHECK(b == doctest::Approx(-mesh->vertices()[i].x).epsilon(1e-15));
    CHECK(c == 0.0);
  }
}
