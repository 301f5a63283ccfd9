#include <cmath>
#include <random>

#include "doctest.h"
#include "presslens/time_series.hpp"
#include "support.hpp"

using namespace presslens;
using namespace presslens::testing;

namespace {

MeshPtr tiny() { return generate_rect_mesh({0, 1}, {0, 1}, 2); }

TimeSeries<ScalarField> random_series(const MeshPtr& mesh, double a, double b, int M, std::mt19937_64& rng, bool compact) {
  std::vector<ScalarField> v;
  for (int i = 0; i < M; ++i) {
    auto f = random_p1(mesh, rng);
    if (compact && (i == 0 || i == M - 1)) f *= 0.0;
    v.push_back(f);
  }
  return TimeSeries<ScalarField>(a, b, v);
}

// Oracle: f_lambda(t) by composite 8-point Gauss of the interpolant over
// [t, t + lambda] split at the grid nodes.
Vector oracle_steklov(const TimeSeries<ScalarField>& s, double lambda, double t) {
  const double lo = std::min(t, t + lambda), hi = std::max(t, t + lambda);
  std::vector<double> br = {lo};
  for (int i = 0; i < s.size(); ++i) {
    if (s.time(i) > lo && s.time(i) < hi) br.push_back(s.time(i));
  }
  br.push_back(hi);
  const auto& g = gauss_legendre_01(8);
  Vector sum = Vector::Zero(s[0].coefficients().size());
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    for (int q = 0; q < 8; ++q) sum += g.weights[q] * (br[k + 1] - br[k]) * series_value(s, br[k] + (br[k + 1] - br[k]) * g.points[q]);
  }
  return sum / std::abs(lambda);
}

}  // namespace

TEST_CASE("series invariants") {
  auto mesh = tiny();
  auto z = ScalarField::zero(mesh);
  CHECK_THROWS(TimeSeries<ScalarField>(0, 1, {z}));
  CHECK_THROWS(TimeSeries<ScalarField>(1, 1, {z, z}));
  CHECK_THROWS(TimeSeries<ScalarField>(0, 1, {z, ScalarField::zero(tiny())}));
  TimeSeries<ScalarField> s(0.0, 2.0, {z, z, z, z, z});
  CHECK(s.dt() == 0.5);
  CHECK(s.time(4) == 2.0);
  for (int i = 1; i < s.size(); ++i) CHECK(std::abs(s.time(i) - s.time(i - 1) - s.dt()) <= 1e-14);
  TimeSeries<ScalarField> two(0.0, 1.0, {z, z});
  CHECK(two.size() == 2);
}

TEST_CASE("Steklov mean matches quadrature oracle") {
  std::mt19937_64 rng(41);
  auto mesh = tiny();
  auto s = random_series(mesh, -0.5, 1.5, 9, rng, false);
  std::uniform_real_distribution<double> lam(-1.9, 1.9), tt(-0.5, 1.5);
  for (int k = 0; k < 40; ++k) {
    double l = lam(rng);
    if (std::abs(l) < 1e-3) l = 0.1;
    const double t = tt(rng);
    CHECK((steklov_value(s, l, t) - oracle_steklov(s, l, t)).norm() <= 1e-13);
  }
}

TEST_CASE("Steklov mean of a constant series") {
  auto mesh = tiny();
  auto c = interpolate_scalar(mesh, [](Point2) { return 2.5; });
  TimeSeries<ScalarField> s(0.0, 1.0, std::vector<ScalarField>(11, c));
  auto m = steklov_mean(s, 0.2);
  for (int i = 0; i <= 8; ++i) CHECK((m[i].coefficients().array() - 2.5).abs().maxCoeff() <= 1e-14);
  // window sticking out past b sees the zero extension
  CHECK(m[10].coefficients().norm() == 0.0);
  auto back = steklov_mean(s, -0.2);
  for (int i = 2; i <= 10; ++i) CHECK((back[i].coefficients().array() - 2.5).abs().maxCoeff() <= 1e-14);
  CHECK_THROWS(steklov_mean(s, 0.0));
  // clamping
  auto wide = steklov_mean(s, 5.0);
  auto clamped = steklov_mean(s, 1.0);
  for (int i = 0; i < s.size(); ++i) CHECK((wide[i].coefficients() - clamped[i].coefficients()).norm() == 0.0);
}

TEST_CASE("Steklov adjoint identity") {
  std::mt19937_64 rng(43);
  auto mesh = tiny();
  std::uniform_real_distribution<double> lam(-0.9, 0.9);
  for (int k = 0; k < 10; ++k) {
    const int M = 5 + static_cast<int>(rng() % 20);
    auto f = random_series(mesh, 0.0, 1.0, M, rng, true);
    auto g = random_series(mesh, 0.0, 1.0, M, rng, true);
    double l = lam(rng);
    if (std::abs(l) < 1e-3) l = 0.05;
    auto [lhs, rhs] = steklov_adjoint_sides(f, g, l);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("Steklov norm bound") {
  std::mt19937_64 rng(47);
  auto mesh = tiny();
  FemSpace space(mesh);
  const GramNorm l2{space.p1_mass()};
  for (int k = 0; k < 5; ++k) {
    auto f = random_series(mesh, 0.0, 2.0, 17, rng, k % 2 == 0);
    for (double l : {f.dt(), f.dt() / 2, f.dt() / 4, 0.37, -0.8, 1.9, -2.0}) {
      for (double s : {1.0, 2.0}) {
        CHECK(steklov_bochner_norm(f, l, s, l2) <= bochner_norm(f, s, l2) * (1 + 1e-12));
        CHECK(grid_norm(steklov_mean(f, l), s, l2) <= grid_norm(f, s, l2) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("Steklov mean converges as lambda shrinks") {
  auto mesh = tiny();
  auto p = interpolate_scalar(mesh, [](Point2 x) { return 1 + x.x; });
  auto s = make_series<ScalarField>(0.0, 1.0, 33, [&](double t) { return std::sin(3 * t) * p; });
  FemSpace space(mesh);
  const GramNorm l2{space.p1_mass()};
  double prev = 0;
  for (double l : {s.dt(), s.dt() / 2, s.dt() / 4}) {
    const double e = steklov_deviation_norm(s, l, 2.0, l2);
    if (prev > 0) CHECK(e < 0.75 * prev);
    prev = e;
  }
}

TEST_CASE("Steklov mean commutes with linear maps") {
  std::mt19937_64 rng(53);
  auto mesh = tiny();
  std::vector<VectorField> v;
  for (int i = 0; i < 7; ++i) v.push_back(random_zero_trace(mesh, rng));
  TimeSeries<VectorField> u(0.0, 1.0, v);
  auto embed = [](const VectorField& x) { return mass_embed(x); };
  auto a = steklov_mean(map_series<DualFunctional>(u, embed), 0.3);
  auto b = map_series<DualFunctional>(steklov_mean(u, 0.3), embed);
  for (int i = 0; i < u.size(); ++i) CHECK((a[i].load() - b[i].load()).norm() <= 1e-12 * std::max(1.0, a[i].load().norm()));
}

TEST_CASE("Newton-Leibniz residual") {
  std::mt19937_64 rng(59);
  auto mesh = tiny();
  auto p = random_p1(mesh, rng);
  auto maxabs = [](const Vector& r) { return r.lpNorm<Eigen::Infinity>(); };
  auto zero = ScalarField::zero(mesh);
  auto c = make_series<ScalarField>(0.0, 3.0, 13, [&](double) { return p; });
  auto z = make_series<ScalarField>(0.0, 3.0, 13, [&](double) { return zero; });
  CHECK(newton_leibniz_residual(c, z, maxabs) == 0.0);
  auto lin = make_series<ScalarField>(0.0, 3.0, 13, [&](double t) { return t * p; });
  CHECK(newton_leibniz_residual(lin, c, maxabs) <= 1e-13);
  auto quad = make_series<ScalarField>(0.0, 3.0, 13, [&](double t) { return t * t * p; });
  auto dquad = make_series<ScalarField>(0.0, 3.0, 13, [&](double t) { return 2 * t * p; });
  CHECK(newton_leibniz_residual(quad, dquad, maxabs) <= 1e-13);
  // a genuinely curved series shows the O(dt^2) trapezoid error
  double prev = 0;
  for (int M : {9, 17, 33}) {
    auto f = make_series<ScalarField>(0.0, 1.0, M, [&](double t) { return std::sin(2 * t) * p; });
    auto fp = make_series<ScalarField>(0.0, 1.0, M, [&](double t) { return 2 * std::cos(2 * t) * p; });
    const double r = newton_leibniz_residual(f, fp, maxabs);
    if (prev > 0) CHECK(rate(prev, r) > 1.9);
    prev = r;
  }
}

TEST_CASE("finite-difference time derivative") {
  auto mesh = tiny();
  auto p = interpolate_scalar(mesh, [](Point2 x) { return x.y; });
  auto f = make_series<ScalarField>(0.0, 1.0, 9, [&](double t) { return (t * t - t) * p; });
  auto d = time_derivative(f);
  for (int i = 0; i < f.size(); ++i) CHECK((d[i].coefficients() - (2 * f.time(i) - 1) * p.coefficients()).norm() <= 1e-13);
}
