#include <cmath>
#include <numbers>

#include "doctest.h"
#include "presslens/mesh.hpp"

using namespace presslens;

TEST_CASE("rect mesh counts") {
  auto m1 = generate_rect_mesh({0, 1}, {0, 1}, 1);
  CHECK(m1->num_vertices() == 4);
  CHECK(m1->num_triangles() == 2);
  auto m2 = generate_rect_mesh({0, 1}, {0, 1}, 2);
  CHECK(m2->num_vertices() == 9);
  CHECK(m2->num_triangles() == 8);
  for (int n : {1, 3, 7}) {
    auto m = generate_rect_mesh({-1, 2}, {0, 0.5}, n);
    CHECK(m->num_vertices() == static_cast<std::size_t>((n + 1) * (n + 1)));
    CHECK(m->num_triangles() == static_cast<std::size_t>(2 * n * n));
    CHECK(m->area() == doctest::Approx(1.5).epsilon(1e-14));
  }
}

TEST_CASE("rect mesh rejects degenerate input") {
  CHECK_THROWS_AS(generate_rect_mesh({0, 1}, {0, 1}, 0), MeshError);
  CHECK_THROWS_AS(generate_rect_mesh({1, 1}, {0, 1}, 2), MeshError);
  CHECK_THROWS_AS(generate_rect_mesh({0, 1}, {2, 2}, 2), MeshError);
}

TEST_CASE("doubled square equals scaled unit square") {
  auto a = generate_rect_mesh({0, 1}, {0, 1}, 2);
  auto b = generate_rect_mesh({0, 2}, {0, 2}, 2);
  REQUIRE(a->num_vertices() == b->num_vertices());
  for (std::size_t i = 0; i < a->num_vertices(); ++i) CHECK(b->vertices()[i] == 2.0 * a->vertices()[i]);
  CHECK(a->triangles() == b->triangles());
}

TEST_CASE("refinement") {
  auto m = generate_rect_mesh({0, 1}, {0, 1}, 1);
  auto r1 = refine(*m);
  CHECK(r1->num_triangles() == 8);
  auto r2 = refine(*r1);
  CHECK(r2->num_triangles() == 32);
  CHECK(std::abs(r2->area() - 1.0) <= 1e-12);
  CHECK_NOTHROW(r2->validate());
  // boundary midpoints stay on the unit-square boundary
  for (const auto& e : r2->boundary_edges()) {
    for (int v : e) {
      const Point2 p = r2->vertices()[v];
      const bool on = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
      CHECK(on);
    }
  }
  auto skew = generate_rect_mesh({-0.3, 1.7}, {0.1, 0.4}, 3);
  const double a0 = skew->area();
  auto s = skew;
  for (int k = 0; k < 3; ++k) s = refine(*s);
  CHECK(std::abs(s->area() - a0) <= 1e-12 * a0);
}

TEST_CASE("disk mesh") {
  double prev = 0.0;
  std::size_t prev_t = 0;
  for (int level = 0; level <= 4; ++level) {
    auto d = generate_disk_mesh({0, 0}, 1.0, level);
    if (level > 0) CHECK(d->num_triangles() == 4 * prev_t);
    CHECK(d->area() > prev);
    CHECK(d->area() < std::numbers::pi);
    prev = d->area();
    prev_t = d->num_triangles();
  }
  CHECK(std::numbers::pi - prev < 0.01);

  auto d1 = generate_disk_mesh({0, 0}, 1.0, 3);
  auto d2 = generate_disk_mesh({0, 0}, 2.0, 3);
  auto dc = generate_disk_mesh({0.25, -1.5}, 0.5, 3);
  for (std::size_t i = 0; i < d1->num_vertices(); ++i) {
    CHECK(d2->vertices()[i] == 2.0 * d1->vertices()[i]);
    const Point2 expect = Point2{0.25, -1.5} + 0.5 * d1->vertices()[i];
    CHECK(std::abs(dc->vertices()[i].x - expect.x) <= 1e-15);
    CHECK(std::abs(dc->vertices()[i].y - expect.y) <= 1e-15);
  }
  CHECK_THROWS_AS(generate_disk_mesh({0, 0}, 0.0, 2), MeshError);
}

TEST_CASE("submesh extraction") {
  auto m = generate_rect_mesh({0, 1}, {0, 1}, 4);
  auto all = extract_submesh(m, [](Point2) { return true; });
  for (std::size_t i = 0; i < m->num_vertices(); ++i) CHECK(all.vertex_injection[i] == static_cast<int>(i));
  for (std::size_t t = 0; t < m->num_triangles(); ++t) CHECK(all.triangle_injection[t] == static_cast<int>(t));

  auto mid = extract_submesh(m, [](Point2 c) { return c.x > 0.25 && c.x < 0.75 && c.y > 0.25 && c.y < 0.75; });
  CHECK(mid.submesh->num_triangles() == 8);
  double sum = 0.0;
  for (int t : mid.triangle_injection) sum += m->triangle_area(t);
  CHECK(mid.submesh->area() == doctest::Approx(sum).epsilon(1e-15));
  for (std::size_t i = 0; i < mid.vertex_injection.size(); ++i) {
    CHECK(mid.submesh->vertices()[i] == m->vertices()[mid.vertex_injection[i]]);
  }
  for (std::size_t e = 0; e < mid.edge_injection.size(); ++e) {
    const auto& se = mid.submesh->edges()[e];
    const auto& pe = m->edges()[mid.edge_injection[e]];
    const int a = mid.vertex_injection[se[0]], b = mid.vertex_injection[se[1]];
    CHECK(((a == pe[0] && b == pe[1]) || (a == pe[1] && b == pe[0])));
  }

  CHECK_THROWS_AS(extract_submesh(m, [](Point2) { return false; }), MeshError);
  // two opposite corner cells share no edge
  CHECK_THROWS_AS(extract_submesh(m, [](Point2 c) { return (c.x < 0.25 && c.y < 0.25) || (c.x > 0.75 && c.y > 0.75); }),
                  MeshError);
}

TEST_CASE("validator rejects broken meshes") {
  std::vector<Point2> v = {{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(TriangleMesh(v, {{0, 2, 1}}), MeshError);
  std::vector<Point2> v4 = {{0, 0}, {1, 0}, {0, 1}, {5, 5}};
  CHECK_THROWS_AS(TriangleMesh(v4, {{0, 1, 2}}), MeshError);
  std::vector<Point2> v6 = {{0, 0}, {1, 0}, {0, 1}, {3, 0}, {4, 0}, {3, 1}};
  CHECK_THROWS_AS(TriangleMesh(v6, {{0, 1, 2}, {3, 4, 5}}), MeshError);
  CHECK_NOTHROW(TriangleMesh(v, {{0, 1, 2}}));
}

TEST_CASE("checksum is sensitive to coordinates") {
  auto a = generate_rect_mesh({0, 1}, {0, 1}, 3);
  auto b = generate_rect_mesh({0, 1}, {0, 1}, 3);
  auto c = generate_rect_mesh({0, 1}, {0, 1.0000001}, 3);
  CHECK(a->checksum() == b->checksum());
  CHECK(a->checksum() != c->checksum());
}
