#include "presslens/corpus.hpp"

namespace presslens::corpus {

namespace {

// X(s) = s^2 (1 - s)^2 and its derivatives.
struct Bump {
  double v, d1, d2, d3;
};

Bump bump(double s) {
  return {s * s * (1 - s) * (1 - s), 2 * s - 6 * s * s + 4 * s * s * s, 2 - 12 * s + 12 * s * s, -12 + 24 * s};
}

}  // namespace

std::array<double, 2> BubbleStokes::velocity(Point2 p) {
  const Bump x = bump(p.x), y = bump(p.y);
  return {x.v * y.d1, -x.d1 * y.v};
}

double BubbleStokes::pressure(Point2 p) { return p.x - 0.5; }

std::array<double, 2> BubbleStokes::forcing(Point2 p) {
  const Bump x = bump(p.x), y = bump(p.y);
  return {-(x.d2 * y.d1 + x.v * y.d3) + 1.0, x.d3 * y.v + x.d1 * y.d2};
}

}  // namespace presslens::corpus

#include <cmath>

namespace presslens::corpus {

double PotentialFlow::phi(Point2 p) { return p.x * p.x - p.y * p.y; }
std::array<double, 2> PotentialFlow::grad_phi(Point2 p) { return {2 * p.x, -2 * p.y}; }
double PotentialFlow::eta(double t) { return std::sin(t); }
double PotentialFlow::eta_prime(double t) { return std::cos(t); }

std::array<double, 2> PotentialFlow::velocity(Point2 p, double t) {
  const auto g = grad_phi(p);
  return {g[0] * eta(t), g[1] * eta(t)};
}

double PotentialFlow::harmonic_pressure(Point2 p, double t) { return -phi(p) * eta(t); }

double PotentialFlow::forcing_pressure(Point2 p, double t) {
  const auto g = grad_phi(p);
  return -0.5 * (g[0] * g[0] + g[1] * g[1]) * eta(t) * eta(t);
}

double PotentialFlow::total_pressure(Point2 p, double t) { return -phi(p) * eta_prime(t) + forcing_pressure(p, t); }

std::array<double, 2> TaylorGreen::velocity(Point2 p, double t) const {
  const double e = std::exp(-a * t);
  return {std::sin(p.x) * std::cos(p.y) * e, -std::cos(p.x) * std::sin(p.y) * e};
}

std::array<double, 2> TaylorGreen::velocity_dt(Point2 p, double t) const {
  const auto u = velocity(p, t);
  return {-a * u[0], -a * u[1]};
}

double TaylorGreen::pressure(Point2 p, double t) const {
  return 0.25 * (std::cos(2 * p.x) + std::cos(2 * p.y)) * std::exp(-2 * a * t);
}

std::array<double, 2> TaylorGreen::pressure_gradient(Point2 p, double t) const {
  const double e = std::exp(-2 * a * t);
  return {-0.5 * std::sin(2 * p.x) * e, -0.5 * std::sin(2 * p.y) * e};
}

}  // namespace presslens::corpus
