#include "presslens/cases.hpp"

#include <cmath>
#include <numbers>

namespace presslens::cases {

GnsProblem potential_flow(int n, int M) {
  using corpus::PotentialFlow;
  auto mesh = generate_rect_mesh({-1, 1}, {-1, 1}, n);
  auto G = extract_submesh(mesh, [](Point2 p) { return std::abs(p.x) < 0.5 && std::abs(p.y) < 0.5; });
  auto u = make_series<VectorField>(0.0, 2.0, M, [&](double t) {
    return interpolate_vector(mesh, [t](Point2 p) { return PotentialFlow::velocity(p, t); });
  });
  Region U = Region::whole(*G.submesh);
  return GnsProblem{std::move(u), 1.0, std::nullopt, {}, std::move(G), std::move(U), 0};
}

GnsProblem taylor_green(int n, int M, double viscosity, double T) {
  if (n % 4 != 0) throw std::invalid_argument("taylor_green: n must be a multiple of 4");
  constexpr double pi = std::numbers::pi;
  const corpus::TaylorGreen tg(viscosity);
  auto mesh = generate_rect_mesh({0, pi}, {0, pi}, n);
  auto G = extract_submesh(mesh, [](Point2 p) { return std::abs(p.x - pi / 2) < pi / 4 && std::abs(p.y - pi / 2) < pi / 4; });
  auto u = make_series<VectorField>(0.0, T, M, [&](double t) {
    return interpolate_vector(mesh, [&tg, t](Point2 p) { return tg.velocity(p, t); });
  });
  Region U = Region::whole(*G.submesh);
  return GnsProblem{std::move(u), viscosity, std::nullopt, {}, std::move(G), std::move(U), 0};
}

}  // namespace presslens::cases
