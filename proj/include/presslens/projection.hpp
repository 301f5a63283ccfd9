#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "presslens/fem.hpp"
#include "presslens/stokes.hpp"

namespace presslens {

/// Unique pressure with zero mean over `region` whose gradient functional is
/// the gradient projection of the source functional.
struct AssociatePressure {
  ScalarField pressure;
  Region region;
  Provenance source;
  double residual = 0.0;
};

/// q = 2 gradient projection E on the zero-trace velocity space and its dual E*
/// on functionals, built on one cached saddle-point factorization.
///   E v  = v - w,   w the divergence-free energy part of v
///   E* f = grad p,  p the pressure of the Stokes solve with load f
class GradientProjector {
 public:
  explicit GradientProjector(MeshPtr mesh, int delta = 0, std::optional<Region> mean_region = std::nullopt);
  explicit GradientProjector(FemSpacePtr space, int delta = 0, std::optional<Region> mean_region = std::nullopt);

  VectorField project_velocity(const VectorField& v) const;
  DualFunctional project_functional(const DualFunctional& f) const;
  AssociatePressure associate_pressure(const DualFunctional& f) const;
  StokesSolution solve(const DualFunctional& f) const;

  const FemSpace& space() const { return *space_; }
  const FemSpacePtr& space_ptr() const { return space_; }
  const MeshPtr& mesh() const { return space_->mesh_ptr(); }
  int delta() const { return delta_; }
  const Region& mean_region() const { return solver_->mean_region(); }

 private:
  FemSpacePtr space_;
  int delta_;
  std::shared_ptr<StokesSolver> solver_;
};

VectorField project_velocity(const GradientProjector& P, const VectorField& v);
DualFunctional project_functional(const GradientProjector& P, const DualFunctional& f);
AssociatePressure associate_pressure(const GradientProjector& P, const DualFunctional& f);

struct PoincareRatio {
  double q = 2.0;
  double ratio = 0.0;
  int used = 0;
  int skipped = 0;
};

/// max over samples of ||p - p_U||_{L^q(U)} / ||grad p||_dual (q = 2 dual norm on the
/// sample mesh). Constant samples are skipped.
PoincareRatio weak_poincare_ratio(const MeshPtr& mesh, const Region& U, const std::vector<ScalarField>& samples, double q);

// --- scaling between B_R and B_1 (n = 2) --------------------------------------

double phi_exponent(double q);  // n/q' - 1
double psi_exponent(double q);  // n/q

/// Checks that `scaled` is `unit` with coordinates mapped by x -> R x + center.
void require_scaled_pair(const TriangleMesh& unit, const TriangleMesh& scaled, double R, Point2 center = {0, 0});

/// Phi_q: velocity on B_R -> velocity on B_1, (Phi u)(y) = R^{n/q'-1} u(Ry).
VectorField scale_field(const VectorField& u_R, const MeshPtr& unit_mesh, double R, double q);
/// Psi_q: scalar on B_R -> scalar on B_1, (Psi f)(y) = R^{n/q} f(Ry).
ScalarField scale_field(const ScalarField& f_R, const MeshPtr& unit_mesh, double R, double q);
/// Inverses of the maps above (B_1 -> B_R).
VectorField unscale_field(const VectorField& u_1, const MeshPtr& scaled_mesh, double R, double q);
ScalarField unscale_field(const ScalarField& f_1, const MeshPtr& scaled_mesh, double R, double q);
/// Functional on B_R defined by <f_R, v> = <f_1, Phi v>.
DualFunctional push_functional(const DualFunctional& f_1, const MeshPtr& scaled_mesh, double R, double q);

struct ScalingRow {
  double R = 1.0;
  double ratio = 0.0;
  double dual_norm = 0.0;
  double pressure_norm = 0.0;
};

/// For each R: ||P(E* f_R)||_{L2(B_R)} / ||f_R||_dual on disk(0, R, level), with f_R the
/// pushforward of f_1 = generator(unit disk space).
std::vector<ScalingRow> check_scaling_invariance(const std::vector<double>& radii,
                                                 const std::function<DualFunctional(const FemSpace&)>& generator,
                                                 int level, int delta = 0);

/// Largest |ratio / ratio_ref - 1| over the table.
double scaling_spread(const std::vector<ScalingRow>& rows);

// --- periodic FFT Helmholtz projection -------------------------------------------

/// Samples of a 2-vector field on a uniform periodic N x N grid, row-major
/// (index j * N + i for x_i, y_j).
struct PeriodicGrid {
  int n = 0;
  std::vector<double> ux;
  std::vector<double> uy;
};

/// Divergence-free part u - grad Laplace^{-1} div u, computed mode by mode.
PeriodicGrid helmholtz_fft(const PeriodicGrid& u);
/// max_k |k . u_hat(k)| / max_k |u_hat(k)|.
double spectral_divergence(const PeriodicGrid& u);

}  // namespace presslens
