#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace presslens {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

using TriangleIndices = std::array<int, 3>;
using EdgeIndices = std::array<int, 2>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conforming 2D triangulation. Edges, boundary edges and boundary flags are
/// derived from the triangle list on construction; the constructor throws
/// MeshError when any invariant fails, so every live instance is valid.
///
/// Local edge k of a triangle is the edge opposite its local vertex k.
class TriangleMesh {
 public:
  TriangleMesh(std::vector<Point2> vertices, std::vector<TriangleIndices> triangles);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<TriangleIndices>& triangles() const { return triangles_; }
  /// Unique edges, numbered by first appearance while sweeping triangles.
  const std::vector<EdgeIndices>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
  /// Boundary edges oriented as in their (single) adjacent triangle.
  const std::vector<EdgeIndices>& boundary_edges() const { return boundary_edges_; }
  const std::vector<std::uint8_t>& boundary_vertex_flags() const { return boundary_vertex_; }
  const std::vector<std::uint8_t>& boundary_edge_flags() const { return boundary_edge_; }
  /// Triangles adjacent to each edge (second entry -1 on the boundary).
  const std::vector<std::array<int, 2>>& edge_triangles() const { return edge_triangles_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  double triangle_area(std::size_t t) const;
  Point2 centroid(std::size_t t) const;
  double area() const;
  /// Largest edge length.
  double mesh_size() const;

  /// FNV-1a hash over the raw bytes of coordinates and connectivity.
  std::uint64_t checksum() const;

  /// Re-checks every invariant and returns one message per violation.
  std::vector<std::string> validate() const;

 private:
  void build_topology();

  std::vector<Point2> vertices_;
  std::vector<TriangleIndices> triangles_;
  std::vector<EdgeIndices> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<int, 2>> edge_triangles_;
  std::vector<EdgeIndices> boundary_edges_;
  std::vector<std::uint8_t> boundary_vertex_;
  std::vector<std::uint8_t> boundary_edge_;
};

using MeshPtr = std::shared_ptr<const TriangleMesh>;

std::string checksum_hex(std::uint64_t sum);

/// Subset of the triangles of one mesh (normalization regions U, norm regions).
class Region {
 public:
  static Region whole(const TriangleMesh& mesh);
  static Region from_predicate(const TriangleMesh& mesh,
                               const std::function<bool(Point2)>& centroid_test);
  static Region from_triangles(const TriangleMesh& mesh, const std::vector<int>& triangles);

  bool contains(std::size_t t) const { return selected_[t] != 0; }
  std::size_t size() const { return selected_.size(); }
  std::size_t count() const;
  double area(const TriangleMesh& mesh) const;
  std::vector<int> triangle_list() const;

 private:
  std::vector<std::uint8_t> selected_;
};

/// A subdomain mesh G built from a subset of parent triangles, together with
/// the index maps back into the parent mesh.
struct SubmeshMap {
  MeshPtr parent;
  MeshPtr submesh;
  std::vector<int> vertex_injection;
  std::vector<int> triangle_injection;
  std::vector<int> edge_injection;
};

/// Structured mesh: each cell of an n x n grid split along its (i,j)-(i+1,j+1) diagonal.
MeshPtr generate_rect_mesh(Interval x_extent, Interval y_extent, int n);

/// Disk mesh: hexagon around the center, red-refined `level` times with new
/// boundary midpoints pushed radially onto the circle.  The radius-R mesh is
/// the unit mesh with coordinates mapped by x -> center + R * x.
MeshPtr generate_disk_mesh(Point2 center, double radius, int level);

/// Uniform red refinement (every triangle split into four).
MeshPtr refine(const TriangleMesh& mesh);

/// Selects parent triangles whose centroid passes `centroid_test`.  Throws
/// MeshError if the selection is empty or not edge-connected.
SubmeshMap extract_submesh(const MeshPtr& mesh, const std::function<bool(Point2)>& centroid_test);

/// Maps a region given on the parent mesh onto the submesh (triangles not in
/// the submesh are dropped).
Region restrict_region(const SubmeshMap& map, const Region& parent_region);

}  // namespace presslens
