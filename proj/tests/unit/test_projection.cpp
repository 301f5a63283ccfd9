#include <cmath>
#include <random>

#include <Eigen/QR>

#include "doctest.h"
#include "presslens/linalg.hpp"
#include "presslens/projection.hpp"
#include "support.hpp"

using namespace presslens;
using namespace presslens::testing;

namespace {

MeshPtr unit_square(int n) { return generate_rect_mesh({0, 1}, {0, 1}, n); }

VectorField random_div_free(const GradientProjector& P, std::mt19937_64& rng) {
  auto v = random_zero_trace(P.mesh(), rng);
  return v - P.project_velocity(v);
}

// Dense oracle: divergence-free energy projection Pi = Z (Z^T A Z)^{-1} Z^T A with Z an
// orthonormal basis of ker B_I from a full QR of B_I^T.
Vector dense_div_free_part(const FemSpace& space, const Vector& v, int delta) {
  const auto& dofs = space.interior_velocity_dofs();
  std::vector<int> rows(space.num_vertices());
  for (int i = 0; i < space.num_vertices(); ++i) rows[i] = i;
  Eigen::MatrixXd a = Eigen::MatrixXd(extract_block(space.velocity_operator(delta), dofs, dofs));
  Eigen::MatrixXd b = Eigen::MatrixXd(extract_block(space.divergence(), rows, dofs));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b.transpose());
  const Eigen::Index rank = qr.rank();
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd z = q.rightCols(q.cols() - rank);
  const Vector vi = gather(v, dofs);
  const Vector coef = (z.transpose() * a * z).ldlt().solve(z.transpose() * a * vi);
  Vector out = Vector::Zero(v.size());
  scatter(z * coef, dofs, out);
  return out;
}

}  // namespace

TEST_CASE("projection algebra") {
  std::mt19937_64 rng(17);
  auto mesh = unit_square(8);
  for (int delta : {0, 1}) {
    GradientProjector P(mesh, delta);
    const auto& space = P.space();
    for (int k = 0; k < 5; ++k) {
      auto psi = random_div_free(P, rng);
      CHECK(P.project_velocity(psi).coefficients().norm() <= 1e-10 * psi.coefficients().norm());
      auto v = random_zero_trace(mesh, rng);
      auto ev = P.project_velocity(v);
      CHECK((P.project_velocity(ev).coefficients() - ev.coefficients()).norm() <= 1e-10 * ev.coefficients().norm());
      auto p = random_p1(mesh, rng);
      auto g = gradient_functional(space, p);
      CHECK((P.project_functional(g).load() - g.load()).norm() <= 1e-10 * g.load().norm());
      // kernel of E*: stiffness images of divergence-free fields
      auto kf = stiffness_functional(space, psi, delta);
      CHECK(P.project_functional(kf).load().norm() <= 1e-10 * kf.load().norm());
      // duality <E* f, v> = <f, E v>
      auto f = mass_embed(space, random_zero_trace(mesh, rng)) + g;
      CHECK(P.project_functional(f).pair(v) == doctest::Approx(f.pair(ev)).epsilon(1e-10));
      auto ef = P.project_functional(f);
      CHECK((P.project_functional(ef).load() - ef.load()).norm() <= 1e-10 * ef.load().norm());
      // complementarity and energy orthogonality
      auto rest = v - ev;
      CHECK((space.divergence() * rest.coefficients()).norm() <= 1e-10 * v.coefficients().norm());
      CHECK(std::abs(energy_product(space, ev, rest, delta)) <= 1e-10 * energy_product(space, v, v, delta));
      // self-adjointness in the energy inner product
      auto w = random_zero_trace(mesh, rng);
      const double lhs = energy_product(space, ev, w, delta);
      const double rhs = energy_product(space, v, P.project_velocity(w), delta);
      CHECK(std::abs(lhs - rhs) <= 1e-11 * std::sqrt(energy_product(space, v, v, delta) * energy_product(space, w, w, delta)));
    }
  }
}

TEST_CASE("dense nullspace oracle") {
  std::mt19937_64 rng(5);
  for (int n : {2, 3, 4}) {
    auto mesh = unit_square(n);
    for (int delta : {0, 1}) {
      GradientProjector P(mesh, delta);
      auto v = random_zero_trace(mesh, rng);
      const Vector expect = v.coefficients() - dense_div_free_part(P.space(), v.coefficients(), delta);
      CHECK((P.project_velocity(v).coefficients() - expect).norm() <= 1e-9 * v.coefficients().norm());
    }
  }
}

TEST_CASE("associate pressure") {
  std::mt19937_64 rng(23);
  auto mesh = unit_square(6);
  Region corner = Region::from_predicate(*mesh, [](Point2 c) { return c.x < 0.5 && c.y < 0.5; });
  GradientProjector P(mesh);
  GradientProjector Pc(mesh, 0, corner);
  auto p = random_p1(mesh, rng);
  auto ap = P.associate_pressure(gradient_functional(p));
  CHECK((ap.pressure.coefficients() - subtract_mean(p).coefficients()).norm() <= 1e-11 * p.coefficients().norm());
  CHECK(ap.source == Provenance::gradient);

  auto f = mass_embed(random_zero_trace(mesh, rng));
  auto a1 = P.associate_pressure(f);
  auto a2 = Pc.associate_pressure(f);
  CHECK(std::abs(mean_value(a1.pressure)) <= 1e-12 * a1.pressure.coefficients().norm());
  CHECK(std::abs(mean_value(a2.pressure, &corner)) <= 1e-12 * a2.pressure.coefficients().norm());
  const Vector diff = a1.pressure.coefficients() - a2.pressure.coefficients();
  CHECK((diff.array() - diff.mean()).matrix().norm() <= 1e-10 * a1.pressure.coefficients().norm());
  // + sign: gradient of the associate pressure equals E* f
  CHECK((gradient_functional(a1.pressure).load() - P.project_functional(f).load()).norm() <= 1e-12 * f.load().norm());
  // it annihilates divergence-free fields
  auto psi = random_div_free(P, rng);
  CHECK(std::abs(gradient_functional(a1.pressure).pair(psi)) <= 1e-10 * psi.coefficients().norm() * f.load().norm());

  // Riesz load of a divergence-free field has zero pressure
  auto riesz_load = stiffness_functional(P.space(), psi, 0);
  CHECK(P.associate_pressure(riesz_load).pressure.coefficients().norm() <= 1e-10 * riesz_load.load().norm());
}

TEST_CASE("boundedness constant of the associate pressure on a subdomain") {
  std::mt19937_64 rng(29);
  double c_prev = 0;
  for (int n : {8, 16}) {
    auto mesh = unit_square(n);
    auto space = std::make_shared<const FemSpace>(mesh);
    GradientProjector P(space);
    RieszSolver riesz(space, 0);
    Region G = Region::from_predicate(*mesh, [](Point2 c) { return std::abs(c.x - 0.5) < 0.25 && std::abs(c.y - 0.5) < 0.25; });
    auto f = load_functional(*space, [](Point2 x) { return std::array<double, 2>{std::sin(3 * x.y), x.x * x.x}; });
    const double c = lq_norm(P.associate_pressure(f).pressure, 2.0, &G) / riesz.dual_norm(f);
    CHECK(std::isfinite(c));
    CHECK(c > 0);
    if (c_prev > 0) CHECK(std::abs(c / c_prev - 1) < 0.2);
    c_prev = c;
  }
}

TEST_CASE("weak Poincare ratio") {
  double prev = 0;
  for (int n : {8, 16}) {
    auto mesh = unit_square(n);
    Region U = Region::whole(*mesh);
    std::vector<ScalarField> samples = {interpolate_scalar(mesh, [](Point2 p) { return p.x; }),
                                        interpolate_scalar(mesh, [](Point2) { return 3.0; }),
                                        interpolate_scalar(mesh, [](Point2 p) { return std::cos(2 * p.x) * p.y; })};
    for (double q : {2.0, 4.0, 1.5}) {
      auto r = weak_poincare_ratio(mesh, U, samples, q);
      CHECK(r.skipped == 1);
      CHECK(r.used == 2);
      CHECK(std::isfinite(r.ratio));
      CHECK(r.ratio > 0);
    }
    auto r2 = weak_poincare_ratio(mesh, U, {samples[0]}, 2.0);
    if (prev > 0) CHECK(std::abs(r2.ratio / prev - 1) < 0.2);
    prev = r2.ratio;
  }
}

TEST_CASE("scaling maps") {
  const int level = 3;
  auto unit = generate_disk_mesh({0, 0}, 1.0, level);
  CHECK(phi_exponent(2.0) == 0.0);
  CHECK(psi_exponent(2.0) == 1.0);
  auto p1 = interpolate_scalar(unit, [](Point2 x) { return x.x * x.y + 0.3; });
  CHECK((scale_field(p1, unit, 1.0, 2.0).coefficients() - p1.coefficients()).norm() == 0.0);
  for (double R : {0.5, 2.0, 4.0, 3.7}) {
    auto mesh = generate_disk_mesh({0, 0}, R, level);
    auto pR = interpolate_scalar(mesh, [](Point2 x) { return std::exp(x.x) - x.y; });
    for (double q : {2.0, 4.0, 1.5}) {
      auto p = scale_field(pR, unit, R, q);
      CHECK(lq_norm(p, q) == doctest::Approx(lq_norm(pR, q)).epsilon(1e-12));
      CHECK((unscale_field(p, mesh, R, q).coefficients() - pR.coefficients()).norm() <= 1e-14 * pR.coefficients().norm());
    }
    auto uR = interpolate_vector(mesh, [](Point2 x) { return std::array<double, 2>{x.y * x.y, std::sin(x.x)}; }, true);
    auto u1 = scale_field(uR, unit, R, 2.0);
    CHECK(h1_seminorm(u1) == doctest::Approx(h1_seminorm(uR)).epsilon(1e-12));
  }
  auto other = generate_disk_mesh({0, 0}, 2.0, level - 1);
  CHECK_THROWS_AS(scale_field(interpolate_scalar(other, [](Point2) { return 1.0; }), unit, 2.0, 2.0), MeshError);
  auto wrong = generate_disk_mesh({0, 0}, 2.0, level);
  CHECK_THROWS_AS(scale_field(interpolate_scalar(wrong, [](Point2) { return 1.0; }), unit, 3.0, 2.0), MeshError);
}

TEST_CASE("scaling invariance of the pressure constant") {
  auto gradient_load = [](const FemSpace& s) {
    return gradient_functional(s, interpolate_scalar(s.mesh_ptr(), [](Point2 x) { return x.x * x.x * x.y - x.y; }));
  };
  auto generic_load = [](const FemSpace& s) {
    return load_functional(s, [](Point2 x) { return std::array<double, 2>{std::cos(x.y), x.x * x.y}; });
  };
  for (const auto& gen : {std::function<DualFunctional(const FemSpace&)>(gradient_load),
                          std::function<DualFunctional(const FemSpace&)>(generic_load)}) {
    auto rows = check_scaling_invariance({0.5, 1.0, 2.0, 4.0}, gen, 3);
    REQUIRE(rows.size() == 4);
    CHECK(scaling_spread(rows) <= 1e-10);
    auto single = check_scaling_invariance({1.0}, gen, 3);
    CHECK(single[0].ratio == doctest::Approx(rows[1].ratio).epsilon(1e-15));
  }
}

TEST_CASE("periodic Helmholtz projection") {
  const int n = 32;
  const double h = 2 * M_PI / n;
  PeriodicGrid grad{n, std::vector<double>(n * n), std::vector<double>(n * n)};
  PeriodicGrid shear = grad;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = i * h, y = j * h;
      grad.ux[j * n + i] = std::cos(x) * std::sin(y);
      grad.uy[j * n + i] = std::sin(x) * std::cos(y);
      shear.ux[j * n + i] = std::sin(y);
      shear.uy[j * n + i] = 0.0;
    }
  }
  auto g = helmholtz_fft(grad);
  for (int k = 0; k < n * n; ++k) {
    CHECK(std::abs(g.ux[k]) < 1e-13);
    CHECK(std::abs(g.uy[k]) < 1e-13);
  }
  auto s = helmholtz_fft(shear);
  for (int k = 0; k < n * n; ++k) CHECK(std::abs(s.ux[k] - shear.ux[k]) < 1e-13);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  PeriodicGrid r{16, std::vector<double>(256), std::vector<double>(256)};
  for (int k = 0; k < 256; ++k) {
    r.ux[k] = dist(rng);
    r.uy[k] = dist(rng);
  }
  auto p = helmholtz_fft(r);
  auto pp = helmholtz_fft(p);
  double d = 0;
  for (int k = 0; k < 256; ++k) d = std::max({d, std::abs(pp.ux[k] - p.ux[k]), std::abs(pp.uy[k] - p.uy[k])});
  CHECK(d < 1e-12);
  CHECK(spectral_divergence(p) < 1e-12);
  CHECK(spectral_divergence(r) > 0.1);

  CHECK_THROWS(helmholtz_fft(PeriodicGrid{6, std::vector<double>(36), std::vector<double>(36)}));
  CHECK_THROWS(helmholtz_fft(PeriodicGrid{2, std::vector<double>(4), std::vector<double>(4)}));
  CHECK_THROWS(helmholtz_fft(PeriodicGrid{7, std::vector<double>(49), std::vector<double>(49)}));
}
