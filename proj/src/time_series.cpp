#include "presslens/time_series.hpp"

namespace presslens {

double bochner_norm_pieces(const std::vector<double>& breaks, double s, const std::function<double(double)>& pointwise) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw std::invalid_argument("Bochner exponent must lie in [1, inf)");
  if (s == 2.0) {
    // ||.||^2 of a piecewise polynomial of degree <= 2 is degree <= 4: 3-point Gauss is exact
    const double sq = integrate_pieces(breaks, 3, [&](double t) {
      const double v = pointwise(t);
      return v * v;
    });
    return std::sqrt(sq);
  }
  std::vector<double> fine;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    for (int j = 0; j < 8; ++j) fine.push_back(breaks[k] + (breaks[k + 1] - breaks[k]) * j / 8.0);
  }
  fine.push_back(breaks.back());
  const double sum = integrate_pieces(fine, 8, [&](double t) { return std::pow(pointwise(t), s); });
  return std::pow(sum, 1.0 / s);
}

}  // namespace presslens
