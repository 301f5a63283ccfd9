#pragma once

#include <array>
#include <vector>

namespace presslens {

/// Symmetric rule on the reference triangle in barycentric coordinates.
/// Weights sum to one, so an integral is area * sum(w_i f(x_i)).
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Edge-midpoint rule, exact for quadratics.
const TriangleRule& triangle_rule_degree2();
/// Six-point rule, exact for quartics.
const TriangleRule& triangle_rule_degree4();
/// Seven-point rule, exact for quintics.
const TriangleRule& triangle_rule_degree5();

/// Smallest built-in rule exact for the given polynomial degree (degree 5 rule beyond that).
const TriangleRule& triangle_rule_for_degree(int degree);

/// Gauss-Legendre nodes/weights on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const LineRule& gauss_legendre_01(int npoints);

}  // namespace presslens
