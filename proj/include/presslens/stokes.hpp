#pragma once

#include <memory>
#include <optional>

#include "presslens/fem.hpp"

namespace presslens {

struct StokesSolution {
  VectorField velocity;
  ScalarField pressure;
  double residual_momentum = 0.0;
  double residual_mass = 0.0;
  int delta = 0;
  /// (||grad u|| + ||p||) / (||rhs||_dual + ||g||), the realized stability constant.
  double estimate_ratio = 0.0;
  int refinement_steps = 0;
};

/// Factorized Taylor-Hood saddle point system
///   (K + delta M) u + grad p = rhs,  div u = g,  mean_U p = 0,
/// with u in the zero-trace P2 space and p in P1.  The pressure constant is
/// fixed by a Lagrange multiplier row holding the P1 weights of U.
class StokesSolver {
 public:
  StokesSolver(FemSpacePtr space, int delta, std::optional<Region> mean_region = std::nullopt);
  ~StokesSolver();
  StokesSolver(StokesSolver&&) noexcept;
  StokesSolver& operator=(StokesSolver&&) noexcept;

  StokesSolution solve(const DualFunctional& rhs, const ScalarField* div_data = nullptr) const;

  const FemSpace& space() const { return *space_; }
  const FemSpacePtr& space_ptr() const { return space_; }
  int delta() const { return delta_; }
  const Region& mean_region() const { return region_; }
  /// Assembled KKT matrix (interior velocity, pressure, multiplier).
  const SparseMatrix& system_matrix() const;

  /// Set to false to skip the dual-norm evaluation behind estimate_ratio.
  bool report_estimate = true;

 private:
  struct Impl;
  FemSpacePtr space_;
  int delta_;
  Region region_;
  std::unique_ptr<Impl> impl_;
};

/// One-shot solve. div_data, when given, must have zero mean over the mesh.
StokesSolution solve_stokes(const MeshPtr& mesh, const DualFunctional& rhs, int delta,
                            const ScalarField* div_data = nullptr, const Region* mean_region = nullptr);

/// Solve with rhs = (K + delta M) v.  The velocity is the divergence-free part of
/// the zero-trace field v in the energy inner product.
StokesSolution solve_projection_complement(const MeshPtr& mesh, const VectorField& v, int delta);

}  // namespace presslens
