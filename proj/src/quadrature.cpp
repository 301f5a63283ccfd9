#include "presslens/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace presslens {

namespace {

void add_orbit3(TriangleRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  rule.points.push_back({b, a, a});
  rule.points.push_back({a, b, a});
  rule.points.push_back({a, a, b});
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

TriangleRule make_degree2() {
  TriangleRule r;
  r.degree = 2;
  r.points = {{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}};
  r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return r;
}

TriangleRule make_degree4() {
  TriangleRule r;
  r.degree = 4;
  add_orbit3(r, 0.44594849091596488631832925388305, 0.22338158967801146569500700843312);
  add_orbit3(r, 0.09157621350977074345957146340220, 0.10995174365532186763832632490021);
  return r;
}

TriangleRule make_degree5() {
  TriangleRule r;
  r.degree = 5;
  const double s15 = std::sqrt(15.0);
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(9.0 / 40.0);
  add_orbit3(r, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
  add_orbit3(r, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
  return r;
}

LineRule make_gauss(int n) {
  // Golub-Welsch is overkill for the handful of orders used here; Newton on P_n.
  LineRule r;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(3.14159265358979323846 * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.points.push_back(0.5 * (1.0 - x));
    r.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule_degree2() {
  static const TriangleRule rule = make_degree2();
  return rule;
}

const TriangleRule& triangle_rule_degree4() {
  static const TriangleRule rule = make_degree4();
  return rule;
}

const TriangleRule& triangle_rule_degree5() {
  static const TriangleRule rule = make_degree5();
  return rule;
}

const TriangleRule& triangle_rule_for_degree(int degree) {
  if (degree <= 2) return triangle_rule_degree2();
  if (degree <= 4) return triangle_rule_degree4();
  return triangle_rule_degree5();
}

const LineRule& gauss_legendre_01(int npoints) {
  if (npoints < 1 || npoints > 8) throw std::invalid_argument("gauss_legendre_01 supports 1..8 points");
  static const std::array<LineRule, 8> rules = [] {
    std::array<LineRule, 8> out;
    for (int n = 1; n <= 8; ++n) out[n - 1] = make_gauss(n);
    return out;
  }();
  return rules[npoints - 1];
}

}  // namespace presslens
