#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "presslens/corpus.hpp"
#include "presslens/linalg.hpp"
#include "presslens/stokes.hpp"
#include "support.hpp"

using namespace presslens;
using namespace presslens::testing;

namespace {

MeshPtr unit_square(int n) { return generate_rect_mesh({0, 1}, {0, 1}, n); }

// Dense oracle for the saddle point: full-pivot LU of a KKT matrix built from
// dense copies of the operators, independent of the sparse factorization.
std::pair<Vector, Vector> dense_stokes(const FemSpace& space, const Vector& load, int delta) {
  const auto& dofs = space.interior_velocity_dofs();
  const int ni = static_cast<int>(dofs.size()), nv = space.num_vertices();
  Eigen::MatrixXd a = Eigen::MatrixXd(space.velocity_operator(delta));
  Eigen::MatrixXd b = Eigen::MatrixXd(space.divergence());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ni + nv + 1, ni + nv + 1);
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < ni; ++j) k(i, j) = a(dofs[i], dofs[j]);
    for (int p = 0; p < nv; ++p) {
      k(i, ni + p) = -b(p, dofs[i]);
      k(ni + p, i) = -b(p, dofs[i]);
    }
  }
  const Vector m = space.region_weights(Region::whole(space.mesh()));
  for (int p = 0; p < nv; ++p) k(ni + p, ni + nv) = k(ni + nv, ni + p) = m[p];
  Vector rhs = Vector::Zero(ni + nv + 1);
  for (int i = 0; i < ni; ++i) rhs[i] = load[dofs[i]];
  const Vector x = k.fullPivLu().solve(rhs);
  Vector u = Vector::Zero(space.num_velocity_dofs());
  scatter(x.head(ni), dofs, u);
  return {u, x.segment(ni, nv)};
}

}  // namespace

TEST_CASE("zero data gives zero solution") {
  auto mesh = unit_square(3);
  for (int delta : {0, 1}) {
    auto s = solve_stokes(mesh, DualFunctional::zero(mesh), delta);
    CHECK(s.velocity.coefficients().norm() == 0.0);
    CHECK(s.pressure.coefficients().norm() == 0.0);
  }
}

TEST_CASE("gradient load is reproduced by the pressure") {
  std::mt19937_64 rng(21);
  {
    auto mesh = unit_square(2);
    FemSpace space(mesh);
    auto p = random_p1(mesh, rng);
    const auto f = gradient_functional(p);
    auto s = solve_stokes(mesh, f, 0);
    auto [u_d, p_d] = dense_stokes(space, f.load(), 0);
    CHECK(u_d.norm() < 1e-13);
    CHECK((p_d - subtract_mean(p).coefficients()).norm() < 1e-13);
    CHECK(s.velocity.coefficients().norm() < 1e-13);
    CHECK((s.pressure.coefficients() - subtract_mean(p).coefficients()).norm() < 1e-12);
  }
  for (int n : {2, 5, 9}) {
    auto mesh = unit_square(n);
    for (int delta : {0, 1}) {
      auto p = random_p1(mesh, rng);
      auto s = solve_stokes(mesh, gradient_functional(p), delta);
      const double scale = p.coefficients().norm();
      CHECK(s.velocity.coefficients().norm() < 1e-11 * scale);
      CHECK((s.pressure.coefficients() - subtract_mean(p).coefficients()).norm() < 1e-11 * scale);
      CHECK(std::abs(mean_value(s.pressure)) < 1e-12 * scale);
      CHECK(s.residual_momentum <= 1e-10);
      CHECK(s.residual_mass <= 1e-10);
    }
  }
}

TEST_CASE("dense oracle equivalence on small meshes") {
  std::mt19937_64 rng(4);
  for (int n : {2, 3, 4}) {
    auto mesh = generate_rect_mesh({0, 1.5}, {-0.5, 0.5}, n);
    auto space = std::make_shared<const FemSpace>(mesh);
    for (int delta : {0, 1}) {
      StokesSolver solver(space, delta);
      auto v = random_zero_trace(mesh, rng);
      auto f = mass_embed(*space, v) + gradient_functional(*space, random_p1(mesh, rng));
      auto s = solver.solve(f);
      auto [u_d, p_d] = dense_stokes(*space, f.load(), delta);
      CHECK((s.velocity.coefficients() - u_d).norm() <= 1e-9 * std::max(1.0, u_d.norm()));
      CHECK((s.pressure.coefficients() - p_d).norm() <= 1e-9 * std::max(1.0, p_d.norm()));
    }
  }
}

TEST_CASE("manufactured solution forcing matches finite differences of the exact fields") {
  using corpus::BubbleStokes;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  const double h = 1e-3;
  for (int k = 0; k < 20; ++k) {
    const Point2 x{dist(rng), dist(rng)};
    const auto f = BubbleStokes::forcing(x);
    for (int c = 0; c < 2; ++c) {
      auto u = [&](double dx, double dy) { return BubbleStokes::velocity({x.x + dx, x.y + dy})[c]; };
      const double lap = (u(h, 0) + u(-h, 0) + u(0, h) + u(0, -h) - 4 * u(0, 0)) / (h * h);
      const double dp = c == 0 ? (BubbleStokes::pressure({x.x + h, x.y}) - BubbleStokes::pressure({x.x - h, x.y})) / (2 * h)
                               : (BubbleStokes::pressure({x.x, x.y + h}) - BubbleStokes::pressure({x.x, x.y - h})) / (2 * h);
      CHECK(f[c] == doctest::Approx(-lap + dp).epsilon(1e-5).scale(1.0));
    }
    // exact velocity is divergence free
    const double div = (BubbleStokes::velocity({x.x + h, x.y})[0] - BubbleStokes::velocity({x.x - h, x.y})[0] +
                        BubbleStokes::velocity({x.x, x.y + h})[1] - BubbleStokes::velocity({x.x, x.y - h})[1]) /
                       (2 * h);
    CHECK(std::abs(div) < 1e-6);
  }
}

TEST_CASE("manufactured convergence") {
  using corpus::BubbleStokes;
  double eu_prev = 0, ep_prev = 0;
  for (int n : {4, 8, 16}) {
    auto mesh = unit_square(n);
    FemSpace space(mesh);
    auto s = solve_stokes(mesh, load_functional(space, BubbleStokes::forcing), 0);
    const double eu = l2_error(s.velocity, BubbleStokes::velocity);
    const double ep = l2_error(s.pressure, BubbleStokes::pressure, nullptr, true);
    if (eu_prev > 0) {
      CHECK(rate(eu_prev, eu) > 2.7);
      CHECK(rate(ep_prev, ep) > 1.8);
    }
    eu_prev = eu;
    ep_prev = ep;
    CHECK(s.estimate_ratio > 0.0);
    CHECK(std::isfinite(s.estimate_ratio));
  }
}

TEST_CASE("nonzero divergence data") {
  const double pi = 3.14159265358979323846;
  auto u_exact = [pi](Point2 p) { return std::array<double, 2>{std::sin(pi * p.x) * std::sin(pi * p.y), 0.0}; };
  auto div_exact = [pi](Point2 p) { return pi * std::cos(pi * p.x) * std::sin(pi * p.y); };
  // -Laplace u = 2 pi^2 u, p = 0
  auto forcing = [pi](Point2 p) { return std::array<double, 2>{2 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y), 0.0}; };
  double prev = 0;
  for (int n : {4, 8, 16}) {
    auto mesh = unit_square(n);
    FemSpace space(mesh);
    auto g = interpolate_scalar(mesh, div_exact);
    auto s = solve_stokes(mesh, load_functional(space, forcing), 0, &g);
    CHECK(s.residual_mass <= 1e-10);
    const double e = l2_error(s.velocity, u_exact);
    if (prev > 0) CHECK(rate(prev, e) > 1.8);
    prev = e;
  }
  auto mesh = unit_square(4);
  auto bad = interpolate_scalar(mesh, [](Point2 p) { return p.x; });
  CHECK_THROWS_AS(solve_stokes(mesh, DualFunctional::zero(mesh), 0, &bad), FieldError);
}

TEST_CASE("projection complement") {
  std::mt19937_64 rng(8);
  auto mesh = unit_square(6);
  FemSpace space(mesh);
  for (int delta : {0, 1}) {
    auto v = random_zero_trace(mesh, rng);
    auto s = solve_projection_complement(mesh, v, delta);
    // Galerkin orthogonality of the divergence-free part
    const double ortho = energy_product(space, s.velocity, v - s.velocity, delta);
    CHECK(std::abs(ortho) <= 1e-10 * energy_product(space, v, v, delta));
    // the divergence-free part is a fixed point
    auto again = solve_projection_complement(mesh, s.velocity, delta);
    CHECK((again.velocity.coefficients() - s.velocity.coefficients()).norm() <= 1e-10 * s.velocity.coefficients().norm());
    CHECK(again.pressure.coefficients().norm() <= 1e-10 * s.velocity.coefficients().norm());
    CHECK((space.divergence() * s.velocity.coefficients()).norm() <= 1e-12 * v.coefficients().norm());
  }
  CHECK_THROWS_AS(solve_projection_complement(mesh, VectorField::zero(mesh, false), 0), FieldError);
}

TEST_CASE("interpolated compactly supported gradient has a vanishing divergence-free part") {
  // phi = b (x^2 - y^2) with b = (16 x(1-x) y(1-y))^3, so grad phi has zero trace
  auto grad = [](Point2 p) {
    const double s = 16 * p.x * (1 - p.x) * p.y * (1 - p.y);
    const double bx = 3 * s * s * 16 * (1 - 2 * p.x) * p.y * (1 - p.y);
    const double by = 3 * s * s * 16 * p.x * (1 - p.x) * (1 - 2 * p.y);
    const double h = p.x * p.x - p.y * p.y;
    return std::array<double, 2>{bx * h + s * s * s * 2 * p.x, by * h - s * s * s * 2 * p.y};
  };
  double prev = 0;
  for (int n : {4, 8, 16, 32}) {
    auto mesh = unit_square(n);
    auto v = interpolate_vector(mesh, grad, true);
    auto s = solve_projection_complement(mesh, v, 0);
    const double ratio = lq_norm(s.velocity, 2.0) / lq_norm(v, 2.0);
    if (prev > 0) CHECK(rate(prev, ratio) > 1.0);
    prev = ratio;
  }
}

TEST_CASE("single-cell mesh is not inf-sup stable and is rejected") {
  auto mesh = unit_square(1);
  CHECK_THROWS_AS(solve_stokes(mesh, DualFunctional::zero(mesh), 0), SolverError);
}

TEST_CASE("delta = 1 energy bound") {
  std::mt19937_64 rng(31);
  auto mesh = unit_square(6);
  auto space = std::make_shared<const FemSpace>(mesh);
  RieszSolver riesz(space, 1);
  for (int k = 0; k < 5; ++k) {
    auto w = random_zero_trace(mesh, rng);
    auto f = mass_embed(*space, w);
    auto s = solve_stokes(mesh, f, 1);
    const double h1 = std::sqrt(energy_product(*space, s.velocity, s.velocity, 1));
    CHECK(h1 <= riesz.dual_norm(f) * (1 + 1e-12));
  }
}

TEST_CASE("solution does not depend on triangle ordering") {
  auto mesh = unit_square(5);
  std::vector<TriangleIndices> tris = mesh->triangles();
  std::mt19937_64 rng(13);
  std::shuffle(tris.begin(), tris.end(), rng);
  for (auto& t : tris) std::rotate(t.begin(), t.begin() + (rng() % 3), t.end());
  auto perm = std::make_shared<const TriangleMesh>(mesh->vertices(), tris);
  auto f = [](Point2 p) { return std::array<double, 2>{std::sin(3 * p.x) + p.y, p.x * p.y}; };
  auto a = solve_stokes(mesh, load_functional(FemSpace(mesh), f), 0);
  auto b = solve_stokes(perm, load_functional(FemSpace(perm), f), 0);
  FemSpace sa(mesh), sb(perm);
  std::map<std::pair<double, double>, int> index;
  for (int node = 0; node < sb.num_p2_nodes(); ++node) index[{sb.node_position(node).x, sb.node_position(node).y}] = node;
  double diff = 0;
  for (int node = 0; node < sa.num_p2_nodes(); ++node) {
    const int other = index.at({sa.node_position(node).x, sa.node_position(node).y});
    for (int c = 0; c < 2; ++c) {
      diff = std::max(diff, std::abs(a.velocity.coefficients()[sa.velocity_dof(c, node)] -
                                     b.velocity.coefficients()[sb.velocity_dof(c, other)]));
    }
  }
  CHECK(diff <= 1e-12);
  CHECK((a.pressure.coefficients() - b.pressure.coefficients()).norm() <= 1e-12);
}
