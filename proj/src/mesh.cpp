#include "presslens/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include <fmt/format.h>

namespace presslens {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

double signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Point2> vertices, std::vector<TriangleIndices> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (vertices_.empty() || triangles_.empty()) throw MeshError("mesh must have vertices and triangles");
  for (const auto& tri : triangles_) {
    for (int v : tri) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
        throw MeshError(fmt::format("triangle references vertex {} out of range", v));
      }
    }
  }
  build_topology();
  auto problems = validate();
  if (!problems.empty()) throw MeshError("invalid mesh: " + problems.front());
}

void TriangleMesh::build_topology() {
  std::map<std::pair<int, int>, int> edge_index;
  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
  edges_.clear();
  edge_triangles_.clear();
  std::vector<int> adjacency_count;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({key.first, key.second});
        edge_triangles_.push_back({static_cast<int>(t), -1});
        adjacency_count.push_back(1);
      } else {
        const int e = it->second;
        if (adjacency_count[e] == 1) edge_triangles_[e][1] = static_cast<int>(t);
        ++adjacency_count[e];
      }
      triangle_edges_[t][k] = it->second;
    }
  }
  boundary_edge_.assign(edges_.size(), 0);
  boundary_vertex_.assign(vertices_.size(), 0);
  boundary_edges_.clear();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (adjacency_count[e] > 2) {
      throw MeshError(fmt::format("edge ({}, {}) shared by {} triangles", edges_[e][0], edges_[e][1],
                                  adjacency_count[e]));
    }
    if (adjacency_count[e] == 1) {
      boundary_edge_[e] = 1;
      const auto& tri = triangles_[edge_triangles_[e][0]];
      // Recover the orientation used by the owning triangle.
      for (int k = 0; k < 3; ++k) {
        const int a = tri[(k + 1) % 3];
        const int b = tri[(k + 2) % 3];
        if (std::minmax(a, b) == std::minmax(edges_[e][0], edges_[e][1])) {
          boundary_edges_.push_back({a, b});
          break;
        }
      }
      boundary_vertex_[edges_[e][0]] = 1;
      boundary_vertex_[edges_[e][1]] = 1;
    }
  }
}

std::vector<std::string> TriangleMesh::validate() const {
  std::vector<std::string> problems;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      problems.push_back(fmt::format("triangle {} repeats a vertex", t));
      continue;
    }
    if (!(triangle_area(t) > 0.0)) problems.push_back(fmt::format("triangle {} has non-positive area", t));
  }
  std::vector<int> count(edges_.size(), 0);
  for (const auto& te : triangle_edges_) {
    for (int e : te) ++count[e];
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (count[e] < 1 || count[e] > 2) problems.push_back(fmt::format("edge {} has {} triangles", e, count[e]));
    if ((count[e] == 1) != (boundary_edge_[e] != 0)) problems.push_back(fmt::format("edge {} boundary flag", e));
  }
  // Interior edges must be traversed in opposite directions by their two triangles.
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (count[e] != 2) continue;
    int orient[2] = {0, 0};
    for (int s = 0; s < 2; ++s) {
      const auto& tri = triangles_[edge_triangles_[e][s]];
      for (int k = 0; k < 3; ++k) {
        if (tri[(k + 1) % 3] == edges_[e][0] && tri[(k + 2) % 3] == edges_[e][1]) orient[s] = 1;
        if (tri[(k + 1) % 3] == edges_[e][1] && tri[(k + 2) % 3] == edges_[e][0]) orient[s] = -1;
      }
    }
    if (orient[0] + orient[1] != 0) problems.push_back(fmt::format("edge {} inconsistently oriented", e));
  }
  std::vector<std::uint8_t> flag(vertices_.size(), 0);
  for (const auto& be : boundary_edges_) flag[be[0]] = flag[be[1]] = 1;
  if (flag != boundary_vertex_) problems.push_back("boundary vertex flags disagree with boundary edges");

  std::vector<std::uint8_t> used(vertices_.size(), 0);
  for (const auto& tri : triangles_) {
    for (int v : tri) used[v] = 1;
  }
  if (std::find(used.begin(), used.end(), 0) != used.end()) problems.push_back("unreferenced vertex");

  // Connectivity through shared edges.
  std::vector<std::uint8_t> seen(triangles_.size(), 0);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!todo.empty()) {
    const int t = todo.front();
    todo.pop();
    for (int e : triangle_edges_[t]) {
      for (int nb : edge_triangles_[e]) {
        if (nb >= 0 && !seen[nb]) {
          seen[nb] = 1;
          ++reached;
          todo.push(nb);
        }
      }
    }
  }
  if (reached != triangles_.size()) problems.push_back("mesh is not connected");
  return problems;
}

double TriangleMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

Point2 TriangleMesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Point2 a = vertices_[tri[0]], b = vertices_[tri[1]], c = vertices_[tri[2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double TriangleMesh::area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) sum += triangle_area(t);
  return sum;
}

double TriangleMesh::mesh_size() const {
  double h = 0.0;
  for (const auto& e : edges_) {
    const Point2 d = vertices_[e[1]] - vertices_[e[0]];
    h = std::max(h, std::sqrt(dot(d, d)));
  }
  return h;
}

std::uint64_t TriangleMesh::checksum() const {
  std::uint64_t h = 14695981039346656037ULL;
  const std::uint64_t counts[2] = {vertices_.size(), triangles_.size()};
  h = fnv1a(h, counts, sizeof(counts));
  for (const auto& p : vertices_) {
    h = fnv1a(h, &p.x, sizeof(double));
    h = fnv1a(h, &p.y, sizeof(double));
  }
  for (const auto& tri : triangles_) h = fnv1a(h, tri.data(), sizeof(int) * 3);
  return h;
}

std::string checksum_hex(std::uint64_t sum) { return fmt::format("{:016x}", sum); }

// ---------------------------------------------------------------------------

Region Region::whole(const TriangleMesh& mesh) {
  Region r;
  r.selected_.assign(mesh.num_triangles(), 1);
  return r;
}

Region Region::from_predicate(const TriangleMesh& mesh, const std::function<bool(Point2)>& centroid_test) {
  Region r;
  r.selected_.assign(mesh.num_triangles(), 0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) r.selected_[t] = centroid_test(mesh.centroid(t)) ? 1 : 0;
  if (r.count() == 0) throw MeshError("region selects no triangles");
  return r;
}

Region Region::from_triangles(const TriangleMesh& mesh, const std::vector<int>& triangles) {
  Region r;
  r.selected_.assign(mesh.num_triangles(), 0);
  for (int t : triangles) {
    if (t < 0 || static_cast<std::size_t>(t) >= mesh.num_triangles()) throw MeshError("region triangle out of range");
    r.selected_[t] = 1;
  }
  if (r.count() == 0) throw MeshError("region selects no triangles");
  return r;
}

std::size_t Region::count() const { return static_cast<std::size_t>(std::count(selected_.begin(), selected_.end(), 1)); }

double Region::area(const TriangleMesh& mesh) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < selected_.size(); ++t) {
    if (selected_[t]) sum += mesh.triangle_area(t);
  }
  return sum;
}

std::vector<int> Region::triangle_list() const {
  std::vector<int> out;
  for (std::size_t t = 0; t < selected_.size(); ++t) {
    if (selected_[t]) out.push_back(static_cast<int>(t));
  }
  return out;
}

// ---------------------------------------------------------------------------

MeshPtr generate_rect_mesh(Interval x_extent, Interval y_extent, int n) {
  if (n < 1) throw MeshError("rect mesh needs n >= 1");
  if (!(x_extent.hi > x_extent.lo) || !(y_extent.hi > y_extent.lo)) {
    throw MeshError("rect mesh needs nondegenerate intervals");
  }
  const double wx = x_extent.hi - x_extent.lo;
  const double wy = y_extent.hi - y_extent.lo;
  std::vector<Point2> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double sx = static_cast<double>(i) / n;
      const double sy = static_cast<double>(j) / n;
      vertices.push_back({i == n ? x_extent.hi : x_extent.lo + wx * sx, j == n ? y_extent.hi : y_extent.lo + wy * sy});
    }
  }
  std::vector<TriangleIndices> triangles;
  triangles.reserve(2 * n * n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return std::make_shared<TriangleMesh>(std::move(vertices), std::move(triangles));
}

namespace {

MeshPtr refine_impl(const TriangleMesh& mesh, const std::function<Point2(Point2)>& boundary_projection) {
  const std::size_t nv = mesh.num_vertices();
  std::vector<Point2> vertices = mesh.vertices();
  vertices.reserve(nv + mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    Point2 mid = 0.5 * (mesh.vertices()[ed[0]] + mesh.vertices()[ed[1]]);
    if (boundary_projection && mesh.boundary_edge_flags()[e]) mid = boundary_projection(mid);
    vertices.push_back(mid);
  }
  std::vector<TriangleIndices> triangles;
  triangles.reserve(4 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& te = mesh.triangle_edges()[t];
    // Midpoint opposite local vertex k.
    const int m0 = static_cast<int>(nv) + te[0];
    const int m1 = static_cast<int>(nv) + te[1];
    const int m2 = static_cast<int>(nv) + te[2];
    triangles.push_back({tri[0], m2, m1});
    triangles.push_back({m2, tri[1], m0});
    triangles.push_back({m1, m0, tri[2]});
    triangles.push_back({m0, m1, m2});
  }
  return std::make_shared<TriangleMesh>(std::move(vertices), std::move(triangles));
}

}  // namespace

MeshPtr refine(const TriangleMesh& mesh) { return refine_impl(mesh, {}); }

MeshPtr generate_disk_mesh(Point2 center, double radius, int level) {
  if (!(radius > 0.0)) throw MeshError("disk mesh needs R > 0");
  if (level < 0) throw MeshError("disk mesh needs level >= 0");
  constexpr double kPi = 3.14159265358979323846;
  std::vector<Point2> vertices{{0.0, 0.0}};
  for (int k = 0; k < 6; ++k) {
    const double angle = kPi * k / 3.0;
    vertices.push_back({std::cos(angle), std::sin(angle)});
  }
  std::vector<TriangleIndices> triangles;
  for (int k = 0; k < 6; ++k) triangles.push_back({0, 1 + k, 1 + (k + 1) % 6});
  MeshPtr unit = std::make_shared<TriangleMesh>(std::move(vertices), std::move(triangles));
  auto onto_circle = [](Point2 p) {
    const double r = std::sqrt(dot(p, p));
    return Point2{p.x / r, p.y / r};
  };
  for (int l = 0; l < level; ++l) unit = refine_impl(*unit, onto_circle);
  if (radius == 1.0 && center.x == 0.0 && center.y == 0.0) return unit;
  std::vector<Point2> scaled = unit->vertices();
  for (auto& p : scaled) p = Point2{center.x + radius * p.x, center.y + radius * p.y};
  return std::make_shared<TriangleMesh>(std::move(scaled), unit->triangles());
}

SubmeshMap extract_submesh(const MeshPtr& mesh, const std::function<bool(Point2)>& centroid_test) {
  SubmeshMap map;
  map.parent = mesh;
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
    if (centroid_test(mesh->centroid(t))) map.triangle_injection.push_back(static_cast<int>(t));
  }
  if (map.triangle_injection.empty()) throw MeshError("submesh selection is empty");
  std::vector<int> local(mesh->num_vertices(), -1);
  for (int t : map.triangle_injection) {
    for (int v : mesh->triangles()[t]) local[v] = 0;
  }
  for (std::size_t v = 0; v < local.size(); ++v) {
    if (local[v] == 0) {
      local[v] = static_cast<int>(map.vertex_injection.size());
      map.vertex_injection.push_back(static_cast<int>(v));
    }
  }
  std::vector<Point2> vertices;
  vertices.reserve(map.vertex_injection.size());
  for (int v : map.vertex_injection) vertices.push_back(mesh->vertices()[v]);
  std::vector<TriangleIndices> triangles;
  for (int t : map.triangle_injection) {
    const auto& tri = mesh->triangles()[t];
    triangles.push_back({local[tri[0]], local[tri[1]], local[tri[2]]});
  }
  std::shared_ptr<TriangleMesh> sub;
  try {
    sub = std::make_shared<TriangleMesh>(std::move(vertices), std::move(triangles));
  } catch (const MeshError& e) {
    throw MeshError(std::string("submesh selection rejected: ") + e.what());
  }
  map.submesh = sub;
  // Edge injection via the local edge slots of corresponding triangles.
  map.edge_injection.assign(sub->num_edges(), -1);
  for (std::size_t lt = 0; lt < map.triangle_injection.size(); ++lt) {
    const int pt = map.triangle_injection[lt];
    for (int k = 0; k < 3; ++k) map.edge_injection[sub->triangle_edges()[lt][k]] = mesh->triangle_edges()[pt][k];
  }
  return map;
}

Region restrict_region(const SubmeshMap& map, const Region& parent_region) {
  std::vector<int> keep;
  for (std::size_t lt = 0; lt < map.triangle_injection.size(); ++lt) {
    if (parent_region.contains(map.triangle_injection[lt])) keep.push_back(static_cast<int>(lt));
  }
  return Region::from_triangles(*map.submesh, keep);
}

}  // namespace presslens
