#pragma once

#include <array>
#include <optional>
#include <vector>

#include "presslens/decomposition.hpp"

namespace presslens {

using Tensor2 = std::array<std::array<double, 2>, 2>;

/// Generalized Navier-Stokes data on Omega with the local window G.
///   d_t u + div(u x u) - div(a D(u)) = div f - grad p
struct GnsProblem {
  TimeSeries<VectorField> u;
  double viscosity = 1.0;
  /// Nodal viscosity on Omega; overrides the constant when present.
  std::optional<TimeSeries<ScalarField>> viscosity_field;
  /// Empty, or the P1 components f11, f12, f21, f22 on Omega.
  std::vector<TimeSeries<ScalarField>> forcing;
  SubmeshMap G;
  /// Normalization region on the G mesh.
  Region U;
  int delta = 0;
};

void validate(const GnsProblem& prob);

/// D(u) = (grad u + grad u^T) / 2 at the three vertices of each triangle.
std::vector<std::array<Tensor2, 3>> symmetric_gradient(const VectorField& u);

enum class ViscousForm { gradient, symmetric };

struct GnsFunctional {
  DualFunctional total;
  /// viscous, convective, forcing.
  std::array<DualFunctional, 3> parts;
};

/// <F, v> = int_G (a D(u) - u x u + f) : grad v at time node i, with its three addends.
/// ViscousForm::symmetric pairs the viscous stress with D(v) instead of grad v.
GnsFunctional assemble_gns_functional(const GnsProblem& prob, int node, ViscousForm form = ViscousForm::gradient);

struct GnsOptions {
  DecomposeOptions decompose;
  /// Relative tolerance of the annihilation precondition; <= 0 skips the gate.
  double gate_tolerance = 5e-2;
  ViscousForm viscous_form = ViscousForm::gradient;
};

struct GnsDecomposition {
  PressureDecomposition dec;
  /// p_0^1 (viscous), p_0^2 (convective), p_0^3 (forcing).
  std::vector<TimeSeries<ScalarField>> parts;
  TimeSeries<DualFunctional> F;
  std::vector<std::array<DualFunctional, 3>> F_parts;
  AnnihilationReport gate;
  /// max nodal |p_0^1 + p_0^2 + p_0^3 - p_0| and the max nodal |p_0| scale.
  double split_residual = 0.0;
  double split_scale = 0.0;
};

GnsDecomposition gns_decompose(const GnsProblem& prob, const GnsOptions& options = {});

struct MomentumReport {
  double residual = 0.0;
  double relative = 0.0;
};

/// max over the bank of |int int (u + grad p_h) . d_t phi + (u x u - a D(u) - f) : grad phi + p_0 div phi|,
/// integrands evaluated directly from the problem data, trapezoid rule in time.
MomentumReport verify_momentum_identity(const GnsDecomposition& gd, const GnsProblem& prob, const TestBank& bank);

struct SplitEstimateRow {
  int part = 0;
  double t = 0.0;
  double ratio = 0.0;
};

/// ||p_0^i(t)||_{L2(G)} / ||F_i(t)||_dual, skipping parts with ||F_i|| <= 1e-10 ||F||.
std::vector<SplitEstimateRow> split_estimates(const GnsDecomposition& gd);

/// Total pressure d_t p_h + p_0 (central differences in time).
TimeSeries<ScalarField> total_pressure(const PressureDecomposition& dec);

}  // namespace presslens
