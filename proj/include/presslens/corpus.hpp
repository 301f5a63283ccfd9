#pragma once

#include <array>

#include "presslens/mesh.hpp"

namespace presslens::corpus {

/// Stokes manufactured case on the unit square: u = curl of the bubble
/// x^2 (1-x)^2 y^2 (1-y)^2, p = x - 1/2, f = -Laplace u + grad p.
struct BubbleStokes {
  static std::array<double, 2> velocity(Point2 p);
  static double pressure(Point2 p);
  static std::array<double, 2> forcing(Point2 p);
};

}  // namespace presslens::corpus

namespace presslens::corpus {

/// u = grad(phi) eta(t), phi = x^2 - y^2, eta = sin t.  No forcing, constant viscosity.
/// Expected parts: p_h = -phi eta, p_0 = -|grad phi|^2 eta^2 / 2 (up to constants).
struct PotentialFlow {
  static double phi(Point2 p);
  static std::array<double, 2> grad_phi(Point2 p);
  static double eta(double t);
  static double eta_prime(double t);
  static std::array<double, 2> velocity(Point2 p, double t);
  static double harmonic_pressure(Point2 p, double t);
  static double forcing_pressure(Point2 p, double t);
  /// d_t p_h + p_0.
  static double total_pressure(Point2 p, double t);
};

/// Taylor-Green vortex for d_t u + div(u x u) - div(a D(u)) = -grad p, D = symmetric gradient.
/// Since div(a D(u)) = (a/2) Laplace u for divergence-free u, the decay rate uses nu = a/2:
/// u = (sin x cos y, -cos x sin y) e^{-a t}, p = (cos 2x + cos 2y) e^{-2 a t} / 4.
struct TaylorGreen {
  explicit TaylorGreen(double viscosity) : a(viscosity) {}
  double a;
  std::array<double, 2> velocity(Point2 p, double t) const;
  std::array<double, 2> velocity_dt(Point2 p, double t) const;
  double pressure(Point2 p, double t) const;
  std::array<double, 2> pressure_gradient(Point2 p, double t) const;
};

}  // namespace presslens::corpus
