#include "presslens/stokes.hpp"

#include <cmath>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "presslens/linalg.hpp"
#include "presslens/log.hpp"

namespace presslens {

struct StokesSolver::Impl {
  SparseMatrix kkt;
  SparseMatrix a_ii;
  SparseMatrix b_i;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  std::unique_ptr<RieszSolver> riesz;
};

StokesSolver::StokesSolver(FemSpacePtr space, int delta, std::optional<Region> mean_region)
    : space_(std::move(space)),
      delta_(delta),
      region_(mean_region ? *mean_region : Region::whole(space_->mesh())),
      impl_(std::make_unique<Impl>()) {
  if (delta != 0 && delta != 1) throw std::invalid_argument("delta must be 0 or 1");
  if (region_.size() != space_->mesh().num_triangles()) throw FieldError("mean region does not belong to the mesh");
  if (region_.count() == 0) throw FieldError("mean region is empty");

  const auto& dofs = space_->interior_velocity_dofs();
  const int ni = static_cast<int>(dofs.size());
  const int nv = space_->num_vertices();
  std::vector<int> all_p(nv);
  for (int i = 0; i < nv; ++i) all_p[i] = i;
  impl_->a_ii = extract_block(space_->velocity_operator(delta), dofs, dofs);
  impl_->b_i = extract_block(space_->divergence(), all_p, dofs);
  const Vector m = space_->region_weights(region_);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(impl_->a_ii.nonZeros() + 2 * impl_->b_i.nonZeros() + 2 * nv);
  for (Eigen::Index k = 0; k < impl_->a_ii.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(impl_->a_ii, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  }
  for (Eigen::Index k = 0; k < impl_->b_i.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(impl_->b_i, k); it; ++it) {
      trips.emplace_back(ni + it.row(), it.col(), -it.value());
      trips.emplace_back(it.col(), ni + it.row(), -it.value());
    }
  }
  const int lam = ni + nv;
  for (int i = 0; i < nv; ++i) {
    if (m[i] == 0.0) continue;
    trips.emplace_back(ni + i, lam, m[i]);
    trips.emplace_back(lam, ni + i, m[i]);
  }
  impl_->kkt.resize(lam + 1, lam + 1);
  impl_->kkt.setFromTriplets(trips.begin(), trips.end());
  impl_->kkt.makeCompressed();
  impl_->lu.compute(impl_->kkt);
  if (impl_->lu.info() != Eigen::Success) {
    throw SolverError(fmt::format("saddle point factorization failed ({} unknowns): {}", lam + 1, impl_->lu.lastErrorMessage()),
                      INFINITY);
  }
  impl_->riesz = std::make_unique<RieszSolver>(space_, 0);
  log()->debug("stokes factorization: {} velocity, {} pressure unknowns, delta={}", ni, nv, delta);
}

StokesSolver::~StokesSolver() = default;
StokesSolver::StokesSolver(StokesSolver&&) noexcept = default;
StokesSolver& StokesSolver::operator=(StokesSolver&&) noexcept = default;

const SparseMatrix& StokesSolver::system_matrix() const { return impl_->kkt; }

StokesSolution StokesSolver::solve(const DualFunctional& rhs, const ScalarField* div_data) const {
  space_->require_same_mesh(rhs.mesh(), "solve_stokes");
  const auto& dofs = space_->interior_velocity_dofs();
  const int ni = static_cast<int>(dofs.size());
  const int nv = space_->num_vertices();

  Vector g_load = Vector::Zero(nv);
  if (div_data) {
    space_->require_same_mesh(div_data->mesh(), "solve_stokes divergence data");
    const double total = integrate(*div_data);
    const double scale = lq_norm(*div_data, 2.0) * std::sqrt(space_->mesh().area());
    if (std::abs(total) > 1e-12 * std::max(scale, 1e-300)) {
      throw FieldError(fmt::format("divergence data is incompatible: integral {:.3e} is not zero", total));
    }
    g_load = space_->p1_mass() * div_data->coefficients();
  }

  Vector b = Vector::Zero(ni + nv + 1);
  b.head(ni) = gather(rhs.load(), dofs);
  b.segment(ni, nv) = -g_load;
  const double bnorm = b.norm();

  StokesSolution sol{VectorField::zero(space_->mesh_ptr()), ScalarField::zero(space_->mesh_ptr())};
  sol.delta = delta_;
  if (bnorm == 0.0) return sol;

  Vector x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("saddle point solve failed", INFINITY);
  Vector r = b - impl_->kkt * x;
  int steps = 0;
  while (steps < 4 && r.norm() > 1e-15 * bnorm) {
    const Vector dx = impl_->lu.solve(r);
    const Vector x_new = x + dx;
    const Vector r_new = b - impl_->kkt * x_new;
    if (r_new.norm() >= r.norm()) break;
    x = x_new;
    r = r_new;
    ++steps;
  }
  sol.refinement_steps = steps;

  Vector u_full = Vector::Zero(space_->num_velocity_dofs());
  scatter(x.head(ni), dofs, u_full);
  const Vector p = x.segment(ni, nv);

  const Vector ru = impl_->a_ii * x.head(ni) - impl_->b_i.transpose() * p - b.head(ni);
  const Vector rm = impl_->b_i * x.head(ni) - g_load;
  sol.residual_momentum = ru.norm() / bnorm;
  sol.residual_mass = rm.norm() / bnorm;
  const double worst = std::max(sol.residual_momentum, sol.residual_mass);
  if (worst > 1e-10) throw SolverError(fmt::format("saddle point residual {:.3e} exceeds 1e-10", worst), worst);

  sol.velocity = VectorField(space_->mesh_ptr(), std::move(u_full), true);
  sol.pressure = ScalarField(space_->mesh_ptr(), p);

  if (report_estimate) {
    const double data = impl_->riesz->dual_norm(rhs) + (div_data ? lq_norm(*div_data, 2.0) : 0.0);
    sol.estimate_ratio = (h1_seminorm(sol.velocity) + lq_norm(sol.pressure, 2.0)) / data;
  }
  return sol;
}

StokesSolution solve_stokes(const MeshPtr& mesh, const DualFunctional& rhs, int delta, const ScalarField* div_data,
                            const Region* mean_region) {
  auto space = std::make_shared<const FemSpace>(mesh);
  StokesSolver solver(space, delta, mean_region ? std::optional<Region>(*mean_region) : std::nullopt);
  return solver.solve(rhs, div_data);
}

StokesSolution solve_projection_complement(const MeshPtr& mesh, const VectorField& v, int delta) {
  if (!v.zero_trace()) throw FieldError("solve_projection_complement needs a zero-trace field");
  auto space = std::make_shared<const FemSpace>(mesh);
  StokesSolver solver(space, delta);
  return solver.solve(stiffness_functional(*space, v, delta));
}

}  // namespace presslens
