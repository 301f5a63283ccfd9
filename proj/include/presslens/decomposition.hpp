#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "presslens/fem.hpp"
#include "presslens/projection.hpp"
#include "presslens/time_series.hpp"

namespace presslens {

/// Bump eta_j(t) = ((t - a)(b - t))^j / ((b - a) / 2)^{2j}, peak value 1.
double bump(int j, double a, double b, double t);
double bump_derivative(int j, double a, double b, double t);

enum class TestBankKind { riesz, curl_bubble };
std::string to_string(TestBankKind k);
TestBankKind test_bank_kind_from_string(const std::string& s);

/// Space-time tests psi_k(x) eta_j(t).  psi_k live on the G mesh with zero trace.
struct TestBank {
  std::vector<VectorField> psi;
  std::vector<int> powers;
  TestBankKind kind = TestBankKind::riesz;
};

/// riesz: Riesz representatives of the loads (sin, cos products of increasing
/// frequency over the bounding box of G).  curl_bubble: interpolated curls of
/// b(x) s_k(x), b the box bubble, i.e. fields divergence-free in the continuum.
TestBank make_test_bank(const FemSpacePtr& space, TestBankKind kind, int count, std::vector<int> powers = {1, 2, 3});

struct WeakIdentityReport {
  /// max over the bank of |data side - pressure side|.
  double residual = 0.0;
  /// residual / max over the bank of the magnitude of the largest single term.
  double relative = 0.0;
  double dt = 0.0;
  /// residual / dt^2.
  double constant = 0.0;
};

struct ContinuityRow {
  double t0 = 0.0;
  double t1 = 0.0;
  double increment = 0.0;
  double data_increment = 0.0;
};

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  double max_increment = 0.0;
  /// max increment / dual-norm increment over pairs with nonzero data increment.
  double constant = 0.0;
};

struct PressureDecomposition {
  TimeSeries<ScalarField> p_h;
  TimeSeries<ScalarField> p_0;
  SubmeshMap G;
  Region U;
  int delta = 0;
  int sigma = -1;
  /// Weak-identity residuals for sigma = -1 and +1 (NaN when sigma was fixed by the caller).
  double residual_minus = 0.0;
  double residual_plus = 0.0;
  WeakIdentityReport weak_identity;
  std::vector<double> harmonicity;
  ContinuityReport continuity;
};

struct DecomposeOptions {
  /// 0 selects sigma by the smaller weak-identity residual (ties to -1).
  int sigma = 0;
  TestBankKind bank_kind = TestBankKind::riesz;
  int bank_size = 6;
  int threads = 1;
  bool compute_reports = true;
};

/// Per node: p_h = -P_G(mass_embed(u|_G)), p_0 = sigma P_G(F), both with zero mean over U
/// (U given on the G mesh).
PressureDecomposition decompose(const TimeSeries<VectorField>& u, const TimeSeries<DualFunctional>& F,
                                const SubmeshMap& G, const Region& U, int delta = 0,
                                const DecomposeOptions& options = {});

/// u restricted to G and mass-embedded, node by node.
TimeSeries<DualFunctional> embedded_velocity(const TimeSeries<VectorField>& u, const SubmeshMap& G);

/// max over the bank of |int <F,phi> - int int u . d_t phi + int int (p_h d_t div phi - p_0 div phi)|.
/// The data terms are integrated exactly in time for the piecewise-linear series, the
/// pressure terms with the trapezoid rule on the grid.
WeakIdentityReport verify_weak_identity(const PressureDecomposition& dec, const TimeSeries<VectorField>& u,
                                        const TimeSeries<DualFunctional>& F, const TestBank& bank);

struct AnnihilationReport {
  double residual = 0.0;
  /// residual / Cauchy-Schwarz bound of the two terms.
  double relative = 0.0;
  bool passed = false;
};

/// |int <F, psi> eta - int int u . psi eta'| for the discretely divergence-free parts
/// psi = v - E v of the bank fields. This is the precondition for the decomposition.
AnnihilationReport annihilation_gate(const TimeSeries<VectorField>& u, const TimeSeries<DualFunctional>& F,
                                     const SubmeshMap& G, const TestBank& bank, double tolerance, int delta = 0);

/// sqrt(r^T K_II^{-1} r) / ||grad p||_{L2(G)}, r = (K p) on interior G vertices: the
/// relative energy distance of p to the discrete harmonic function with its boundary
/// values.  p may live on the parent mesh or on G.
double harmonicity_residual(const ScalarField& p, const SubmeshMap& G);

/// Increments of p_h over interior G vertices, with the dual norms of the
/// mass-embedded velocity increments when `embedded` is given.
ContinuityReport continuity_report(const TimeSeries<ScalarField>& p_h, const SubmeshMap& G,
                                   const TimeSeries<DualFunctional>* embedded = nullptr, int delta = 0);

/// Gradient sample at time node i, on mesh edge e, at point x of that edge.
using GradientSampler = std::function<Point2(int node, int edge, Point2 x)>;

struct ReconstructedPotential {
  TimeSeries<ScalarField> potential;
  /// max over non-tree edges and nodes of |p(x1) - p(x0) - edge integral|.
  double loop_residual = 0.0;
};

/// p(x, t_i) = base_values[i] + path integral of the sampled gradient along a
/// breadth-first spanning tree from `base_vertex` (Simpson rule per edge).
ReconstructedPotential reconstruct_potential(const MeshPtr& mesh, double a, double b, int M,
                                             const GradientSampler& grad, int base_vertex,
                                             const std::vector<double>& base_values);

/// Sampler for the P1 gradients of a scalar series (tangential component is exact on every edge).
GradientSampler p1_gradient_sampler(const TimeSeries<ScalarField>& p);

int nearest_vertex(const TriangleMesh& mesh, Point2 x);

struct GradientEstimateRow {
  double t = 0.0;
  double ratio = 0.0;
};

/// ||grad p_h(t)||_{L^q(G)} / ||u(t)||_{L^q(G)} per node (nodes with u = 0 skipped).
std::vector<GradientEstimateRow> gradient_estimate(const PressureDecomposition& dec,
                                                   const TimeSeries<VectorField>& u, double q);

/// Per-time constants removed in space, then relative space-time L2(G) error:
/// sqrt(sum_i w_i ||p_i - c_i - exact_i||^2 / sum_i w_i ||exact_i - mean||^2), trapezoid weights.
double spacetime_relative_error(const TimeSeries<ScalarField>& p,
                                const std::function<double(Point2, double)>& exact);

}  // namespace presslens
