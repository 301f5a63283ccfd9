#include "presslens/fem.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "presslens/linalg.hpp"
#include "presslens/quadrature.hpp"

namespace presslens {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::vector<std::uint8_t> boundary_nodes(const TriangleMesh& mesh) {
  std::vector<std::uint8_t> flags(mesh.num_vertices() + mesh.num_edges(), 0);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) flags[v] = mesh.boundary_vertex_flags()[v];
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) flags[mesh.num_vertices() + e] = mesh.boundary_edge_flags()[e];
  return flags;
}

ElementGeometry make_geometry(const TriangleMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  const Point2 p0 = mesh.vertices()[tri[0]];
  const Point2 p1 = mesh.vertices()[tri[1]];
  const Point2 p2 = mesh.vertices()[tri[2]];
  const double twice_area = cross(p1 - p0, p2 - p0);
  ElementGeometry g;
  g.area = 0.5 * twice_area;
  g.grad_lambda[0] = {(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area};
  g.grad_lambda[1] = {(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area};
  g.grad_lambda[2] = {(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area};
  return g;
}

SparseMatrix block_diagonal(const SparseMatrix& block) {
  const Eigen::Index n = block.rows();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * block.nonZeros());
  for (int c = 0; c < 2; ++c) {
    for (Eigen::Index k = 0; k < block.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(block, k); it; ++it) {
        trips.emplace_back(c * n + it.row(), c * n + it.col(), it.value());
      }
    }
  }
  SparseMatrix out(2 * n, 2 * n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

double power_abs(double x, double q) {
  const double a = std::abs(x);
  return q == 2.0 ? a * a : std::pow(a, q);
}

void check_exponent(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw std::invalid_argument(fmt::format("L^q exponent must lie in (1, inf), got {}", q));
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::gradient: return "gradient";
    case Provenance::mass_embedded: return "mass-embedded";
    case Provenance::tensor_divergence: return "tensor-divergence";
    case Provenance::stiffness: return "stiffness";
    case Provenance::composite: return "composite";
  }
  return "composite";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "gradient") return Provenance::gradient;
  if (s == "mass-embedded") return Provenance::mass_embedded;
  if (s == "tensor-divergence") return Provenance::tensor_divergence;
  if (s == "stiffness") return Provenance::stiffness;
  if (s == "composite") return Provenance::composite;
  throw FieldError("unknown provenance tag: " + s);
}

// --- fields -------------------------------------------------------------------

ScalarField::ScalarField(MeshPtr mesh, Vector coefficients) : mesh_(std::move(mesh)), coefficients_(std::move(coefficients)) {
  if (!mesh_) throw FieldError("scalar field without mesh");
  if (coefficients_.size() != static_cast<Eigen::Index>(mesh_->num_vertices())) {
    throw FieldError(fmt::format("scalar field has {} coefficients, mesh has {} vertices", coefficients_.size(),
                                 mesh_->num_vertices()));
  }
  if (!all_finite(coefficients_)) throw FieldError("scalar field has non-finite coefficients");
}

ScalarField ScalarField::zero(MeshPtr mesh) {
  const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
  return ScalarField(std::move(mesh), Vector::Zero(n));
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  if (other.mesh_ != mesh_) throw FieldError("scalar field mesh mismatch");
  coefficients_ += other.coefficients_;
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  if (other.mesh_ != mesh_) throw FieldError("scalar field mesh mismatch");
  coefficients_ -= other.coefficients_;
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  coefficients_ *= s;
  return *this;
}

VectorField::VectorField(MeshPtr mesh, Vector coefficients, bool zero_trace)
    : mesh_(std::move(mesh)), coefficients_(std::move(coefficients)), zero_trace_(zero_trace) {
  if (!mesh_) throw FieldError("vector field without mesh");
  const auto nodes = static_cast<Eigen::Index>(mesh_->num_vertices() + mesh_->num_edges());
  if (coefficients_.size() != 2 * nodes) {
    throw FieldError(fmt::format("vector field has {} coefficients, expected {}", coefficients_.size(), 2 * nodes));
  }
  if (!all_finite(coefficients_)) throw FieldError("vector field has non-finite coefficients");
  if (zero_trace_) {
    const auto flags = boundary_nodes(*mesh_);
    for (Eigen::Index i = 0; i < coefficients_.size(); ++i) {
      if (flags[i % nodes] && coefficients_[i] != 0.0) throw FieldError("zero-trace field has nonzero boundary value");
    }
  }
}

VectorField VectorField::zero(MeshPtr mesh, bool zero_trace) {
  const auto nodes = static_cast<Eigen::Index>(mesh->num_vertices() + mesh->num_edges());
  return VectorField(std::move(mesh), Vector::Zero(2 * nodes), zero_trace);
}

VectorField VectorField::with_zero_trace() const {
  const auto flags = boundary_nodes(*mesh_);
  const auto nodes = static_cast<Eigen::Index>(flags.size());
  Vector c = coefficients_;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (flags[i % nodes]) c[i] = 0.0;
  }
  return VectorField(mesh_, std::move(c), true);
}

VectorField& VectorField::operator+=(const VectorField& other) {
  if (other.mesh_ != mesh_) throw FieldError("vector field mesh mismatch");
  coefficients_ += other.coefficients_;
  zero_trace_ = zero_trace_ && other.zero_trace_;
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  if (other.mesh_ != mesh_) throw FieldError("vector field mesh mismatch");
  coefficients_ -= other.coefficients_;
  zero_trace_ = zero_trace_ && other.zero_trace_;
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  coefficients_ *= s;
  return *this;
}

DualFunctional::DualFunctional(MeshPtr mesh, Vector load, Provenance provenance)
    : mesh_(std::move(mesh)), load_(std::move(load)), provenance_(provenance) {
  if (!mesh_) throw FieldError("functional without mesh");
  const auto flags = boundary_nodes(*mesh_);
  const auto nodes = static_cast<Eigen::Index>(flags.size());
  if (load_.size() != 2 * nodes) throw FieldError(fmt::format("functional has {} entries, expected {}", load_.size(), 2 * nodes));
  if (!all_finite(load_)) throw FieldError("functional has non-finite entries");
  for (Eigen::Index i = 0; i < load_.size(); ++i) {
    if (flags[i % nodes]) load_[i] = 0.0;
  }
}

DualFunctional DualFunctional::zero(MeshPtr mesh) {
  const auto nodes = static_cast<Eigen::Index>(mesh->num_vertices() + mesh->num_edges());
  return DualFunctional(std::move(mesh), Vector::Zero(2 * nodes), Provenance::composite);
}

double DualFunctional::pair(const VectorField& v) const {
  if (v.mesh() != mesh_) throw FieldError("pairing across different meshes");
  return load_.dot(v.coefficients());
}

DualFunctional& DualFunctional::operator+=(const DualFunctional& other) {
  if (other.mesh_ != mesh_) throw FieldError("functional mesh mismatch");
  load_ += other.load_;
  if (other.provenance_ != provenance_) provenance_ = Provenance::composite;
  return *this;
}

DualFunctional& DualFunctional::operator-=(const DualFunctional& other) {
  if (other.mesh_ != mesh_) throw FieldError("functional mesh mismatch");
  load_ -= other.load_;
  if (other.provenance_ != provenance_) provenance_ = Provenance::composite;
  return *this;
}

DualFunctional& DualFunctional::operator*=(double s) {
  load_ *= s;
  return *this;
}

// --- basis ----------------------------------------------------------------------

std::array<double, 6> p2_basis(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[1] * l[2],         4.0 * l[2] * l[0],         4.0 * l[0] * l[1]};
}

std::array<Point2, 6> p2_basis_gradients(const std::array<double, 3>& l, const ElementGeometry& g) {
  std::array<Point2, 6> out;
  for (int k = 0; k < 3; ++k) out[k] = (4.0 * l[k] - 1.0) * g.grad_lambda[k];
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    out[3 + k] = 4.0 * (l[i] * g.grad_lambda[j] + l[j] * g.grad_lambda[i]);
  }
  return out;
}

// --- space ------------------------------------------------------------------------

FemSpace::FemSpace(MeshPtr mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw FieldError("FemSpace needs a mesh");
  const auto& m = *mesh_;
  num_nodes_ = static_cast<int>(m.num_vertices() + m.num_edges());
  geometry_.reserve(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) geometry_.push_back(make_geometry(m, t));
  boundary_node_ = boundary_nodes(m);
  for (int c = 0; c < 2; ++c) {
    for (int node = 0; node < num_nodes_; ++node) {
      if (!boundary_node_[node]) interior_dofs_.push_back(velocity_dof(c, node));
    }
  }

  const int nv = num_vertices();
  std::vector<Eigen::Triplet<double>> tk, tm, tb, tk1, tm1;
  const auto& r2 = triangle_rule_degree2();
  const auto& r4 = triangle_rule_degree4();
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& g = geometry_[t];
    const auto nodes = p2_nodes(t);
    const auto& tri = m.triangles()[t];
    double ke[6][6] = {};
    double me[6][6] = {};
    double be[3][2][6] = {};
    for (std::size_t q = 0; q < r2.points.size(); ++q) {
      const auto& l = r2.points[q];
      const double w = r2.weights[q] * g.area;
      const auto dn = p2_basis_gradients(l, g);
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) ke[a][b] += w * dot(dn[a], dn[b]);
      }
      for (int i = 0; i < 3; ++i) {
        for (int b = 0; b < 6; ++b) {
          be[i][0][b] += w * l[i] * dn[b].x;
          be[i][1][b] += w * l[i] * dn[b].y;
        }
      }
    }
    for (std::size_t q = 0; q < r4.points.size(); ++q) {
      const auto n = p2_basis(r4.points[q]);
      const double w = r4.weights[q] * g.area;
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) me[a][b] += w * n[a] * n[b];
      }
    }
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        tk.emplace_back(nodes[a], nodes[b], ke[a][b]);
        tm.emplace_back(nodes[a], nodes[b], me[a][b]);
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        for (int b = 0; b < 6; ++b) tb.emplace_back(tri[i], velocity_dof(c, nodes[b]), be[i][c][b]);
      }
      for (int j = 0; j < 3; ++j) {
        tk1.emplace_back(tri[i], tri[j], g.area * dot(g.grad_lambda[i], g.grad_lambda[j]));
        tm1.emplace_back(tri[i], tri[j], g.area * (i == j ? 2.0 : 1.0) / 12.0);
      }
    }
  }
  k2_.resize(num_nodes_, num_nodes_);
  k2_.setFromTriplets(tk.begin(), tk.end());
  m2_.resize(num_nodes_, num_nodes_);
  m2_.setFromTriplets(tm.begin(), tm.end());
  div_.resize(nv, 2 * num_nodes_);
  div_.setFromTriplets(tb.begin(), tb.end());
  k1_.resize(nv, nv);
  k1_.setFromTriplets(tk1.begin(), tk1.end());
  m1_.resize(nv, nv);
  m1_.setFromTriplets(tm1.begin(), tm1.end());
  velocity_op_[0] = block_diagonal(k2_);
  SparseMatrix km = k2_ + m2_;
  velocity_op_[1] = block_diagonal(km);
}

std::array<int, 6> FemSpace::p2_nodes(std::size_t t) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& te = mesh_->triangle_edges()[t];
  const int nv = num_vertices();
  return {tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]};
}

Point2 FemSpace::node_position(int node) const {
  const int nv = num_vertices();
  if (node < nv) return mesh_->vertices()[node];
  const auto& e = mesh_->edges()[node - nv];
  return 0.5 * (mesh_->vertices()[e[0]] + mesh_->vertices()[e[1]]);
}

const SparseMatrix& FemSpace::velocity_operator(int delta) const {
  if (delta != 0 && delta != 1) throw std::invalid_argument("delta must be 0 or 1");
  return velocity_op_[delta];
}

Vector FemSpace::region_weights(const Region& region) const {
  if (region.size() != mesh_->num_triangles()) throw FieldError("region does not belong to this mesh");
  Vector w = Vector::Zero(num_vertices());
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
    if (!region.contains(t)) continue;
    const auto& tri = mesh_->triangles()[t];
    for (int v : tri) w[v] += geometry_[t].area / 3.0;
  }
  return w;
}

void FemSpace::require_same_mesh(const MeshPtr& other, const char* what) const {
  if (other != mesh_) throw FieldError(fmt::format("{}: field lives on a different mesh", what));
}

// --- operations ---------------------------------------------------------------------

SparseOperator assemble_velocity_stiffness(const TriangleMesh& mesh, int delta) {
  FemSpace space(std::make_shared<TriangleMesh>(mesh));
  return {space.velocity_operator(delta), true};
}

SparseOperator assemble_divergence(const TriangleMesh& mesh) {
  FemSpace space(std::make_shared<TriangleMesh>(mesh));
  return {space.divergence(), false};
}

DualFunctional gradient_functional(const FemSpace& space, const ScalarField& p) {
  space.require_same_mesh(p.mesh(), "gradient_functional");
  Vector load = -(space.divergence().transpose() * p.coefficients());
  return DualFunctional(space.mesh_ptr(), std::move(load), Provenance::gradient);
}

DualFunctional gradient_functional(const ScalarField& p) { return gradient_functional(FemSpace(p.mesh()), p); }

DualFunctional mass_embed(const FemSpace& space, const VectorField& u) {
  space.require_same_mesh(u.mesh(), "mass_embed");
  const int n = space.num_p2_nodes();
  Vector load(2 * n);
  load.head(n) = space.scalar_mass() * u.coefficients().head(n);
  load.tail(n) = space.scalar_mass() * u.coefficients().tail(n);
  return DualFunctional(space.mesh_ptr(), std::move(load), Provenance::mass_embedded);
}

DualFunctional mass_embed(const VectorField& u) { return mass_embed(FemSpace(u.mesh()), u); }

DualFunctional mass_embed(const ScalarField& ux, const ScalarField& uy) { return mass_embed(p1_to_p2(ux, uy)); }

DualFunctional load_functional(const FemSpace& space, const VectorFunction& f) {
  const auto& mesh = space.mesh();
  const auto& rule = triangle_rule_degree5();
  const int n = space.num_p2_nodes();
  Vector load = Vector::Zero(2 * n);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto nodes = space.p2_nodes(t);
    const double area = space.geometry(t).area;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const auto basis = p2_basis(rule.points[k]);
      const auto v = f(physical_point(mesh, t, rule.points[k]));
      const double w = rule.weights[k] * area;
      for (int a = 0; a < 6; ++a) {
        load[nodes[a]] += w * v[0] * basis[a];
        load[n + nodes[a]] += w * v[1] * basis[a];
      }
    }
  }
  return DualFunctional(space.mesh_ptr(), std::move(load), Provenance::mass_embedded);
}

DualFunctional stiffness_functional(const FemSpace& space, const VectorField& v, int delta) {
  space.require_same_mesh(v.mesh(), "stiffness_functional");
  return DualFunctional(space.mesh_ptr(), space.velocity_operator(delta) * v.coefficients(), Provenance::stiffness);
}

struct RieszSolver::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> factor;
  SparseMatrix interior;
};

RieszSolver::RieszSolver(FemSpacePtr space, int delta) : space_(std::move(space)), delta_(delta), impl_(std::make_shared<Impl>()) {
  const auto& dofs = space_->interior_velocity_dofs();
  impl_->interior = extract_block(space_->velocity_operator(delta), dofs, dofs);
  impl_->factor.compute(impl_->interior);
  if (impl_->factor.info() != Eigen::Success) throw SolverError("Riesz factorization failed", 0.0);
}

VectorField RieszSolver::represent(const DualFunctional& f) const {
  space_->require_same_mesh(f.mesh(), "riesz_representative");
  const auto& dofs = space_->interior_velocity_dofs();
  Vector rhs = gather(f.load(), dofs);
  Vector w = impl_->factor.solve(rhs);
  const double scale = std::max(rhs.norm(), 1e-300);
  const double residual = (impl_->interior * w - rhs).norm() / scale;
  if (!w.allFinite() || residual > 1e-10) throw SolverError(fmt::format("Riesz solve residual {:.3e}", residual), residual);
  Vector full = Vector::Zero(space_->num_velocity_dofs());
  scatter(w, dofs, full);
  return VectorField(space_->mesh_ptr(), std::move(full), true);
}

double RieszSolver::dual_norm(const DualFunctional& f) const {
  const VectorField w = represent(f);
  return std::sqrt(std::max(0.0, f.load().dot(w.coefficients())));
}

VectorField riesz_representative(const DualFunctional& f, int delta) {
  return RieszSolver(std::make_shared<FemSpace>(f.mesh()), delta).represent(f);
}

double dual_norm(const DualFunctional& f, int delta) {
  return RieszSolver(std::make_shared<FemSpace>(f.mesh()), delta).dual_norm(f);
}

double energy_product(const FemSpace& space, const VectorField& v, const VectorField& w, int delta) {
  space.require_same_mesh(v.mesh(), "energy_product");
  space.require_same_mesh(w.mesh(), "energy_product");
  return v.coefficients().dot(space.velocity_operator(delta) * w.coefficients());
}

// --- evaluation -------------------------------------------------------------------------

Point2 physical_point(const TriangleMesh& mesh, std::size_t triangle, const std::array<double, 3>& l) {
  const auto& tri = mesh.triangles()[triangle];
  const auto& v = mesh.vertices();
  return {l[0] * v[tri[0]].x + l[1] * v[tri[1]].x + l[2] * v[tri[2]].x,
          l[0] * v[tri[0]].y + l[1] * v[tri[1]].y + l[2] * v[tri[2]].y};
}

double evaluate(const ScalarField& p, std::size_t triangle, const std::array<double, 3>& l) {
  const auto& tri = p.mesh()->triangles()[triangle];
  const auto& c = p.coefficients();
  return l[0] * c[tri[0]] + l[1] * c[tri[1]] + l[2] * c[tri[2]];
}

namespace {

std::array<int, 6> p2_nodes_of(const TriangleMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  const auto& te = mesh.triangle_edges()[t];
  const int nv = static_cast<int>(mesh.num_vertices());
  return {tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]};
}

}  // namespace

std::array<double, 2> evaluate(const VectorField& u, std::size_t triangle, const std::array<double, 3>& l) {
  const auto& mesh = *u.mesh();
  const auto nodes = p2_nodes_of(mesh, triangle);
  const auto n = p2_basis(l);
  const auto nn = static_cast<Eigen::Index>(mesh.num_vertices() + mesh.num_edges());
  const auto& c = u.coefficients();
  std::array<double, 2> out{0.0, 0.0};
  for (int a = 0; a < 6; ++a) {
    out[0] += n[a] * c[nodes[a]];
    out[1] += n[a] * c[nn + nodes[a]];
  }
  return out;
}

Point2 gradient(const ScalarField& p, std::size_t triangle) {
  const auto g = make_geometry(*p.mesh(), triangle);
  const auto& tri = p.mesh()->triangles()[triangle];
  const auto& c = p.coefficients();
  return c[tri[0]] * g.grad_lambda[0] + c[tri[1]] * g.grad_lambda[1] + c[tri[2]] * g.grad_lambda[2];
}

std::array<std::array<double, 2>, 2> gradient(const VectorField& u, std::size_t triangle, const std::array<double, 3>& l) {
  const auto& mesh = *u.mesh();
  const auto g = make_geometry(mesh, triangle);
  const auto nodes = p2_nodes_of(mesh, triangle);
  const auto dn = p2_basis_gradients(l, g);
  const auto nn = static_cast<Eigen::Index>(mesh.num_vertices() + mesh.num_edges());
  const auto& c = u.coefficients();
  std::array<std::array<double, 2>, 2> out{};
  for (int a = 0; a < 6; ++a) {
    out[0][0] += c[nodes[a]] * dn[a].x;
    out[0][1] += c[nodes[a]] * dn[a].y;
    out[1][0] += c[nn + nodes[a]] * dn[a].x;
    out[1][1] += c[nn + nodes[a]] * dn[a].y;
  }
  return out;
}

// --- norms --------------------------------------------------------------------------------

double lq_norm(const ScalarField& p, double q, const Region* region) {
  check_exponent(q);
  const auto& mesh = *p.mesh();
  const auto& rule = q == 2.0 ? triangle_rule_degree2() : triangle_rule_degree5();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (region && !region->contains(t)) continue;
    double local = 0.0;
    for (std::size_t k = 0; k < rule.points.size(); ++k) local += rule.weights[k] * power_abs(evaluate(p, t, rule.points[k]), q);
    sum += local * mesh.triangle_area(t);
  }
  return std::pow(sum, 1.0 / q);
}

double lq_norm(const VectorField& u, double q, const Region* region) {
  check_exponent(q);
  const auto& mesh = *u.mesh();
  const auto& rule = q == 2.0 ? triangle_rule_degree4() : triangle_rule_degree5();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (region && !region->contains(t)) continue;
    double local = 0.0;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const auto v = evaluate(u, t, rule.points[k]);
      local += rule.weights[k] * power_abs(std::hypot(v[0], v[1]), q);
    }
    sum += local * mesh.triangle_area(t);
  }
  return std::pow(sum, 1.0 / q);
}

double lq_norm_gradient(const ScalarField& p, double q, const Region* region) {
  check_exponent(q);
  const auto& mesh = *p.mesh();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (region && !region->contains(t)) continue;
    const Point2 g = gradient(p, t);
    sum += power_abs(std::hypot(g.x, g.y), q) * mesh.triangle_area(t);
  }
  return std::pow(sum, 1.0 / q);
}

double h1_seminorm(const VectorField& u) {
  FemSpace space(u.mesh());
  return std::sqrt(std::max(0.0, energy_product(space, u, u, 0)));
}

double integrate(const ScalarField& p, const Region* region) {
  const auto& mesh = *p.mesh();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (region && !region->contains(t)) continue;
    const auto& tri = mesh.triangles()[t];
    const auto& c = p.coefficients();
    sum += mesh.triangle_area(t) * (c[tri[0]] + c[tri[1]] + c[tri[2]]) / 3.0;
  }
  return sum;
}

double mean_value(const ScalarField& p, const Region* region) {
  const double area = region ? region->area(*p.mesh()) : p.mesh()->area();
  return integrate(p, region) / area;
}

ScalarField subtract_mean(const ScalarField& p, const Region* region) {
  const double m = mean_value(p, region);
  Vector c = p.coefficients().array() - m;
  return ScalarField(p.mesh(), std::move(c));
}

// --- interpolation --------------------------------------------------------------------------

ScalarField interpolate_scalar(const MeshPtr& mesh, const ScalarFunction& f) {
  Vector c(mesh->num_vertices());
  for (std::size_t v = 0; v < mesh->num_vertices(); ++v) {
    c[v] = f(mesh->vertices()[v]);
    if (!std::isfinite(c[v])) throw FieldError("interpolation callback returned a non-finite value");
  }
  return ScalarField(mesh, std::move(c));
}

VectorField interpolate_vector(const MeshPtr& mesh, const VectorFunction& f, bool zero_trace) {
  const FemSpace space(mesh);
  const int n = space.num_p2_nodes();
  Vector c(2 * n);
  for (int node = 0; node < n; ++node) {
    const auto v = f(space.node_position(node));
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw FieldError("interpolation callback returned a non-finite value");
    const bool clear = zero_trace && space.is_boundary_node(node);
    c[node] = clear ? 0.0 : v[0];
    c[n + node] = clear ? 0.0 : v[1];
  }
  return VectorField(mesh, std::move(c), zero_trace);
}

VectorField p1_to_p2(const ScalarField& ux, const ScalarField& uy) {
  if (ux.mesh() != uy.mesh()) throw FieldError("p1_to_p2 component mesh mismatch");
  const auto& mesh = *ux.mesh();
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices() + mesh.num_edges());
  Vector c(2 * n);
  c.segment(0, nv) = ux.coefficients();
  c.segment(n, nv) = uy.coefficients();
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    c[nv + e] = 0.5 * (ux.coefficients()[ed[0]] + ux.coefficients()[ed[1]]);
    c[n + nv + e] = 0.5 * (uy.coefficients()[ed[0]] + uy.coefficients()[ed[1]]);
  }
  return VectorField(ux.mesh(), std::move(c), false);
}

double l2_error(const ScalarField& p, const ScalarFunction& exact, const Region* region, bool modulo_constants) {
  const auto& mesh = *p.mesh();
  const auto& rule = triangle_rule_degree5();
  double shift = 0.0;
  if (modulo_constants) {
    double integral = 0.0, area = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      if (region && !region->contains(t)) continue;
      double local = 0.0;
      for (std::size_t k = 0; k < rule.points.size(); ++k) {
        local += rule.weights[k] * (evaluate(p, t, rule.points[k]) - exact(physical_point(mesh, t, rule.points[k])));
      }
      integral += local * mesh.triangle_area(t);
      area += mesh.triangle_area(t);
    }
    shift = integral / area;
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (region && !region->contains(t)) continue;
    double local = 0.0;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const double d = evaluate(p, t, rule.points[k]) - exact(physical_point(mesh, t, rule.points[k])) - shift;
      local += rule.weights[k] * d * d;
    }
    sum += local * mesh.triangle_area(t);
  }
  return std::sqrt(sum);
}

double l2_error(const VectorField& u, const VectorFunction& exact, const Region* region) {
  const auto& mesh = *u.mesh();
  const auto& rule = triangle_rule_degree5();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (region && !region->contains(t)) continue;
    double local = 0.0;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const auto uh = evaluate(u, t, rule.points[k]);
      const auto ue = exact(physical_point(mesh, t, rule.points[k]));
      local += rule.weights[k] * ((uh[0] - ue[0]) * (uh[0] - ue[0]) + (uh[1] - ue[1]) * (uh[1] - ue[1]));
    }
    sum += local * mesh.triangle_area(t);
  }
  return std::sqrt(sum);
}

// --- restriction ------------------------------------------------------------------------------

ScalarField restrict_to(const SubmeshMap& map, const ScalarField& p) {
  if (p.mesh() != map.parent) throw FieldError("restrict_to: field is not on the parent mesh");
  Vector c(map.vertex_injection.size());
  for (std::size_t i = 0; i < map.vertex_injection.size(); ++i) c[i] = p.coefficients()[map.vertex_injection[i]];
  return ScalarField(map.submesh, std::move(c));
}

VectorField restrict_to(const SubmeshMap& map, const VectorField& u) {
  if (u.mesh() != map.parent) throw FieldError("restrict_to: field is not on the parent mesh");
  const auto& parent = *map.parent;
  const auto& sub = *map.submesh;
  const auto pn = static_cast<Eigen::Index>(parent.num_vertices() + parent.num_edges());
  const auto sn = static_cast<Eigen::Index>(sub.num_vertices() + sub.num_edges());
  const auto pv = static_cast<Eigen::Index>(parent.num_vertices());
  const auto sv = static_cast<Eigen::Index>(sub.num_vertices());
  Vector c(2 * sn);
  for (int comp = 0; comp < 2; ++comp) {
    for (Eigen::Index i = 0; i < sv; ++i) c[comp * sn + i] = u.coefficients()[comp * pn + map.vertex_injection[i]];
    for (std::size_t e = 0; e < map.edge_injection.size(); ++e) {
      c[comp * sn + sv + e] = u.coefficients()[comp * pn + pv + map.edge_injection[e]];
    }
  }
  return VectorField(map.submesh, std::move(c), false);
}

}  // namespace presslens
