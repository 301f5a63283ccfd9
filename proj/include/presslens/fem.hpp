#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "presslens/mesh.hpp"

namespace presslens {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

using ScalarFunction = std::function<double(Point2)>;
using VectorFunction = std::function<std::array<double, 2>(Point2)>;

enum class Provenance { gradient, mass_embedded, tensor_divergence, stiffness, composite };
std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// Piecewise-linear scalar field, one coefficient per mesh vertex.
class ScalarField {
 public:
  ScalarField(MeshPtr mesh, Vector coefficients);
  static ScalarField zero(MeshPtr mesh);

  const MeshPtr& mesh() const { return mesh_; }
  const Vector& coefficients() const { return coefficients_; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  MeshPtr mesh_;
  Vector coefficients_;
};

/// Piecewise-quadratic 2-vector field. Coefficients are blocked by component:
/// index c * (V + E) + node, where nodes are vertices then edge midpoints.
class VectorField {
 public:
  VectorField(MeshPtr mesh, Vector coefficients, bool zero_trace = false);
  static VectorField zero(MeshPtr mesh, bool zero_trace = true);

  const MeshPtr& mesh() const { return mesh_; }
  const Vector& coefficients() const { return coefficients_; }
  bool zero_trace() const { return zero_trace_; }
  /// Copy with every boundary-node coefficient set to zero.
  VectorField with_zero_trace() const;

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

 private:
  MeshPtr mesh_;
  Vector coefficients_;
  bool zero_trace_;
};

/// Element of the dual of the zero-trace P2 velocity space.  Entries at
/// boundary nodes are stored as exact zeros, so the pairing with a zero-trace
/// field is the plain dot product.
class DualFunctional {
 public:
  DualFunctional(MeshPtr mesh, Vector load, Provenance provenance);
  static DualFunctional zero(MeshPtr mesh);

  const MeshPtr& mesh() const { return mesh_; }
  const Vector& load() const { return load_; }
  Provenance provenance() const { return provenance_; }

  double pair(const VectorField& v) const;

  DualFunctional& operator+=(const DualFunctional& other);
  DualFunctional& operator-=(const DualFunctional& other);
  DualFunctional& operator*=(double s);
  friend DualFunctional operator+(DualFunctional a, const DualFunctional& b) { return a += b; }
  friend DualFunctional operator-(DualFunctional a, const DualFunctional& b) { return a -= b; }
  friend DualFunctional operator*(double s, DualFunctional a) { return a *= s; }

 private:
  MeshPtr mesh_;
  Vector load_;
  Provenance provenance_;
};

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  Vector apply(const Vector& x) const { return matrix * x; }
};

/// Affine element data: area and constant gradients of the barycentric coordinates.
struct ElementGeometry {
  double area = 0.0;
  std::array<Point2, 3> grad_lambda;
};

/// Taylor-Hood discretization data for one mesh: element geometry, dof
/// layout, and the assembled P2 stiffness/mass and P1-P2 divergence blocks.
class FemSpace {
 public:
  explicit FemSpace(MeshPtr mesh);

  const MeshPtr& mesh_ptr() const { return mesh_; }
  const TriangleMesh& mesh() const { return *mesh_; }

  int num_vertices() const { return static_cast<int>(mesh_->num_vertices()); }
  int num_p2_nodes() const { return num_nodes_; }
  int num_velocity_dofs() const { return 2 * num_nodes_; }
  int velocity_dof(int component, int node) const { return component * num_nodes_ + node; }

  /// Global P2 node ids of triangle t: three vertices, then the edge
  /// midpoints opposite local vertices 0, 1, 2.
  std::array<int, 6> p2_nodes(std::size_t t) const;
  bool is_boundary_node(int node) const { return boundary_node_[node] != 0; }
  bool is_boundary_velocity_dof(int dof) const { return boundary_node_[dof % num_nodes_] != 0; }
  /// Velocity dofs not on the boundary, ascending.
  const std::vector<int>& interior_velocity_dofs() const { return interior_dofs_; }
  Point2 node_position(int node) const;

  const ElementGeometry& geometry(std::size_t t) const { return geometry_[t]; }

  const SparseMatrix& scalar_stiffness() const { return k2_; }
  const SparseMatrix& scalar_mass() const { return m2_; }
  /// Rows: P1 test functions; columns: velocity dofs. (B v)_i = int phi_i div v.
  const SparseMatrix& divergence() const { return div_; }
  const SparseMatrix& p1_stiffness() const { return k1_; }
  const SparseMatrix& p1_mass() const { return m1_; }
  /// Blocked vector operator diag(K + delta M, K + delta M).
  const SparseMatrix& velocity_operator(int delta) const;

  /// w_i = int_U phi_i for P1 hat functions; w . p is the integral of p over U.
  Vector region_weights(const Region& region) const;

  void require_same_mesh(const MeshPtr& other, const char* what) const;

 private:
  MeshPtr mesh_;
  int num_nodes_;
  std::vector<ElementGeometry> geometry_;
  std::vector<std::uint8_t> boundary_node_;
  std::vector<int> interior_dofs_;
  SparseMatrix k2_, m2_, div_, k1_, m1_;
  SparseMatrix velocity_op_[2];
};

using FemSpacePtr = std::shared_ptr<const FemSpace>;

// --- P2 basis on barycentric coordinates ------------------------------------

std::array<double, 6> p2_basis(const std::array<double, 3>& lambda);
std::array<Point2, 6> p2_basis_gradients(const std::array<double, 3>& lambda, const ElementGeometry& geo);

// --- spec-level operations ---------------------------------------------------

/// Blocked velocity form int grad u : grad v (+ u . v when delta == 1), no boundary elimination.
SparseOperator assemble_velocity_stiffness(const TriangleMesh& mesh, int delta);
SparseOperator assemble_divergence(const TriangleMesh& mesh);

/// <grad p, psi> = -int p div psi, i.e. load = -B^T p.
DualFunctional gradient_functional(const FemSpace& space, const ScalarField& p);
DualFunctional gradient_functional(const ScalarField& p);

/// <u, psi> = int u . psi.
DualFunctional mass_embed(const FemSpace& space, const VectorField& u);
DualFunctional mass_embed(const VectorField& u);
/// Vector data given as two P1 component fields.
DualFunctional mass_embed(const ScalarField& ux, const ScalarField& uy);

/// <f, psi> = int f . psi for an analytic vector function (degree-5 quadrature).
DualFunctional load_functional(const FemSpace& space, const VectorFunction& f);

/// (K + delta M) v restricted to interior rows, as a functional.
DualFunctional stiffness_functional(const FemSpace& space, const VectorField& v, int delta);

/// Cached Cholesky factorization of the interior velocity block.
class RieszSolver {
 public:
  RieszSolver(FemSpacePtr space, int delta);
  VectorField represent(const DualFunctional& f) const;
  /// sqrt(<f, J^{-1} f>): the dual norm with respect to the energy norm.
  double dual_norm(const DualFunctional& f) const;
  const FemSpace& space() const { return *space_; }
  int delta() const { return delta_; }

 private:
  struct Impl;
  FemSpacePtr space_;
  int delta_;
  std::shared_ptr<Impl> impl_;
};

VectorField riesz_representative(const DualFunctional& f, int delta);
double dual_norm(const DualFunctional& f, int delta);

/// v^T (K + delta M) w.
double energy_product(const FemSpace& space, const VectorField& v, const VectorField& w, int delta);

/// (int |f|^q)^{1/q} over the region (whole mesh if none).
double lq_norm(const ScalarField& p, double q, const Region* region = nullptr);
double lq_norm(const VectorField& u, double q, const Region* region = nullptr);
/// L^q norm of the (piecewise constant) gradient of a P1 field.
double lq_norm_gradient(const ScalarField& p, double q, const Region* region = nullptr);
/// (int |grad u|^2)^{1/2}.
double h1_seminorm(const VectorField& u);

double integrate(const ScalarField& p, const Region* region = nullptr);
double mean_value(const ScalarField& p, const Region* region = nullptr);
/// p minus its mean over the region.
ScalarField subtract_mean(const ScalarField& p, const Region* region = nullptr);

ScalarField interpolate_scalar(const MeshPtr& mesh, const ScalarFunction& f);
VectorField interpolate_vector(const MeshPtr& mesh, const VectorFunction& f, bool zero_trace = false);
/// Exact embedding of P1 vector data into the P2 space.
VectorField p1_to_p2(const ScalarField& ux, const ScalarField& uy);

double evaluate(const ScalarField& p, std::size_t triangle, const std::array<double, 3>& lambda);
std::array<double, 2> evaluate(const VectorField& u, std::size_t triangle, const std::array<double, 3>& lambda);
/// Gradient of a P1 field on a triangle.
Point2 gradient(const ScalarField& p, std::size_t triangle);
/// Rows: components, columns: derivatives; G[i][j] = d u_i / d x_j.
std::array<std::array<double, 2>, 2> gradient(const VectorField& u, std::size_t triangle,
                                              const std::array<double, 3>& lambda);
Point2 physical_point(const TriangleMesh& mesh, std::size_t triangle, const std::array<double, 3>& lambda);

/// L^2 error of a discrete field against an analytic one (degree-5 quadrature).
double l2_error(const ScalarField& p, const ScalarFunction& exact, const Region* region = nullptr,
                bool modulo_constants = false);
double l2_error(const VectorField& u, const VectorFunction& exact, const Region* region = nullptr);

ScalarField restrict_to(const SubmeshMap& map, const ScalarField& p);
VectorField restrict_to(const SubmeshMap& map, const VectorField& u);

}  // namespace presslens
