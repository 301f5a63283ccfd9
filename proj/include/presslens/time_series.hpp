#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "presslens/fem.hpp"
#include "presslens/log.hpp"
#include "presslens/quadrature.hpp"

namespace presslens {

/// Uniform access to the coefficient vector of the field kinds a series may hold.
template <class F>
struct FieldTraits;

template <>
struct FieldTraits<ScalarField> {
  static const Vector& coefficients(const ScalarField& f) { return f.coefficients(); }
  static ScalarField make(const ScalarField& proto, Vector c) { return ScalarField(proto.mesh(), std::move(c)); }
};

template <>
struct FieldTraits<VectorField> {
  static const Vector& coefficients(const VectorField& f) { return f.coefficients(); }
  static VectorField make(const VectorField& proto, Vector c) { return VectorField(proto.mesh(), std::move(c), proto.zero_trace()); }
};

template <>
struct FieldTraits<DualFunctional> {
  static const Vector& coefficients(const DualFunctional& f) { return f.load(); }
  static DualFunctional make(const DualFunctional& proto, Vector c) {
    return DualFunctional(proto.mesh(), std::move(c), proto.provenance());
  }
};

/// Values on the uniform grid t_i = a + i (b - a) / (M - 1), read as the
/// piecewise-linear interpolant in time, extended by zero outside [a, b].
template <class F>
class TimeSeries {
 public:
  TimeSeries(double a, double b, std::vector<F> values) : a_(a), b_(b), values_(std::move(values)) {
    if (!(b_ > a_) || !std::isfinite(a_) || !std::isfinite(b_)) throw std::invalid_argument("time series needs a < b");
    if (values_.size() < 2) throw std::invalid_argument("time series needs at least two nodes");
    for (const auto& v : values_) {
      if (v.mesh() != values_.front().mesh()) throw FieldError("time series values live on different meshes");
    }
  }

  double a() const { return a_; }
  double b() const { return b_; }
  int size() const { return static_cast<int>(values_.size()); }
  double dt() const { return (b_ - a_) / (size() - 1); }
  double time(int i) const { return i == size() - 1 ? b_ : a_ + i * dt(); }
  const F& operator[](int i) const { return values_[i]; }
  const std::vector<F>& values() const { return values_; }
  const MeshPtr& mesh() const { return values_.front().mesh(); }

 private:
  double a_, b_;
  std::vector<F> values_;
};

/// Series obtained by applying `fn` to every node value.
template <class G, class F, class Fn>
TimeSeries<G> map_series(const TimeSeries<F>& s, Fn fn) {
  std::vector<G> out;
  out.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) out.push_back(fn(s[i]));
  return TimeSeries<G>(s.a(), s.b(), std::move(out));
}

template <class F>
TimeSeries<F> make_series(double a, double b, int M, const std::function<F(double)>& at) {
  if (M < 2) throw std::invalid_argument("time series needs at least two nodes");
  std::vector<F> v;
  v.reserve(M);
  for (int i = 0; i < M; ++i) v.push_back(at(i == M - 1 ? b : a + i * (b - a) / (M - 1)));
  return TimeSeries<F>(a, b, std::move(v));
}

template <class F>
bool same_grid(const TimeSeries<F>& x, const TimeSeries<F>& y) {
  return x.size() == y.size() && x.a() == y.a() && x.b() == y.b();
}

template <class F>
void require_same_grid(const TimeSeries<F>& x, const TimeSeries<F>& y, const char* what) {
  if (!same_grid(x, y)) throw std::invalid_argument(fmt::format("{}: time grids differ", what));
}

namespace detail {

/// Antiderivative from -inf of the zero-extended hat function of node j.
inline double hat_antiderivative(int j, int M, double a, double dt, double x) {
  const double tj = a + j * dt;
  double v = 0.0;
  if (j > 0) {
    const double lo = tj - dt;
    const double c = std::clamp(x, lo, tj);
    v += (c - lo) * (c - lo) / (2.0 * dt);
  }
  if (j < M - 1 && x > tj) {
    const double hi = tj + dt;
    const double c = std::min(x, hi);
    v += dt / 2.0 - (hi - c) * (hi - c) / (2.0 * dt);
  }
  return v;
}

inline double clamp_lambda(double lambda, double span) {
  if (lambda == 0.0 || !std::isfinite(lambda)) throw std::invalid_argument("Steklov mean needs a finite nonzero lambda");
  if (std::abs(lambda) > span) {
    log()->warn("Steklov lambda {} clamped to the interval length {}", lambda, span);
    return std::copysign(span, lambda);
  }
  return lambda;
}

}  // namespace detail

/// Weights w_j with f_lambda(t) = sum_j w_j f_j for the exact Steklov mean of the
/// zero-extended piecewise-linear series.
inline std::vector<double> steklov_weights(double a, double b, int M, double lambda, double t) {
  const double dt = (b - a) / (M - 1);
  std::vector<double> w(M, 0.0);
  for (int j = 0; j < M; ++j) {
    w[j] = (detail::hat_antiderivative(j, M, a, dt, t + lambda) - detail::hat_antiderivative(j, M, a, dt, t)) / lambda;
  }
  return w;
}

/// Hat-function weights of the piecewise-linear interpolant at time t (zero outside [a, b]).
inline std::vector<double> interpolation_weights(double a, double b, int M, double t) {
  std::vector<double> w(M, 0.0);
  if (t < a || t > b) return w;
  const double dt = (b - a) / (M - 1);
  const double s = (t - a) / dt;
  const int i = std::min(static_cast<int>(std::floor(s)), M - 2);
  const double r = s - i;
  w[i] = 1.0 - r;
  w[i + 1] = r;
  return w;
}

template <class F>
Vector combine(const TimeSeries<F>& s, const std::vector<double>& w) {
  Vector out = Vector::Zero(FieldTraits<F>::coefficients(s[0]).size());
  for (int j = 0; j < s.size(); ++j) {
    if (w[j] != 0.0) out += w[j] * FieldTraits<F>::coefficients(s[j]);
  }
  return out;
}

template <class F>
Vector series_value(const TimeSeries<F>& s, double t) {
  return combine(s, interpolation_weights(s.a(), s.b(), s.size(), t));
}

template <class F>
Vector steklov_value(const TimeSeries<F>& s, double lambda, double t) {
  lambda = detail::clamp_lambda(lambda, s.b() - s.a());
  return combine(s, steklov_weights(s.a(), s.b(), s.size(), lambda, t));
}

/// f_lambda(t) = (1/lambda) int_t^{t+lambda} f, sampled on the grid of s.
template <class F>
TimeSeries<F> steklov_mean(const TimeSeries<F>& s, double lambda) {
  lambda = detail::clamp_lambda(lambda, s.b() - s.a());
  std::vector<F> out;
  out.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) {
    out.push_back(FieldTraits<F>::make(s[0], combine(s, steklov_weights(s.a(), s.b(), s.size(), lambda, s.time(i)))));
  }
  return TimeSeries<F>(s.a(), s.b(), std::move(out));
}

/// Sorted breakpoints of the grid and of the grid shifted by each shift, clipped to [a, b].
inline std::vector<double> merged_breakpoints(double a, double b, int M, const std::vector<double>& shifts) {
  const double dt = (b - a) / (M - 1);
  std::vector<double> pts;
  for (int i = 0; i < M; ++i) {
    const double t = i == M - 1 ? b : a + i * dt;
    pts.push_back(t);
    for (double sh : shifts) {
      const double u = t + sh;
      if (u > a && u < b) pts.push_back(u);
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > 1e-14 * (b - a)) out.push_back(p);
  }
  out.back() = b;
  return out;
}

/// Exact piecewise-polynomial Gauss integration of fn over [a, b] split at `breaks`.
inline double integrate_pieces(const std::vector<double>& breaks, int gauss_points, const std::function<double(double)>& fn) {
  const auto& rule = gauss_legendre_01(gauss_points);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k], len = breaks[k + 1] - breaks[k];
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) local += rule.weights[q] * fn(lo + len * rule.points[q]);
    sum += local * len;
  }
  return sum;
}

/// Both sides of int f_lambda . g dt = int f . g_{-lambda} dt, integrated exactly.
template <class F>
std::pair<double, double> steklov_adjoint_sides(const TimeSeries<F>& f, const TimeSeries<F>& g, double lambda) {
  require_same_grid(f, g, "steklov_adjoint_sides");
  lambda = detail::clamp_lambda(lambda, f.b() - f.a());
  const auto breaks = merged_breakpoints(f.a(), f.b(), f.size(), {lambda, -lambda});
  const double lhs =
      integrate_pieces(breaks, 3, [&](double t) { return steklov_value(f, lambda, t).dot(series_value(g, t)); });
  const double rhs =
      integrate_pieces(breaks, 3, [&](double t) { return series_value(f, t).dot(steklov_value(g, -lambda, t)); });
  return {lhs, rhs};
}

/// Pointwise space norm of a coefficient vector: sqrt(c^T W c), W = identity when empty.
struct GramNorm {
  SparseMatrix gram;
  double operator()(const Vector& c) const {
    return gram.size() == 0 ? c.norm() : std::sqrt(std::max(0.0, c.dot(gram * c)));
  }
};

/// (int ||g(t)||^s dt)^{1/s} for the pointwise norm of a piecewise polynomial g with these breakpoints.
double bochner_norm_pieces(const std::vector<double>& breaks, double s, const std::function<double(double)>& pointwise);

/// ||f_lambda - f||_{L^s(a,b;X)}, integrated piecewise exactly (s = 2).
template <class F>
double steklov_deviation_norm(const TimeSeries<F>& f, double lambda, double s, const GramNorm& norm) {
  lambda = detail::clamp_lambda(lambda, f.b() - f.a());
  const auto breaks = merged_breakpoints(f.a(), f.b(), f.size(), {-lambda});
  return bochner_norm_pieces(breaks, s, [&](double t) { return norm(steklov_value(f, lambda, t) - series_value(f, t)); });
}

/// ||f||_{L^s(a,b;X)} of the continuous piecewise-linear series.  s = 2 is exact;
/// s = 1 uses 8-point Gauss on 8 sub-pieces per grid interval.
template <class F>
double bochner_norm(const TimeSeries<F>& f, double s, const GramNorm& norm) {
  const auto breaks = merged_breakpoints(f.a(), f.b(), f.size(), {});
  return bochner_norm_pieces(breaks, s, [&](double t) { return norm(series_value(f, t)); });
}

/// ||f_lambda||_{L^s(a,b;X)} of the exact (not grid-sampled) Steklov mean.
template <class F>
double steklov_bochner_norm(const TimeSeries<F>& f, double lambda, double s, const GramNorm& norm) {
  lambda = detail::clamp_lambda(lambda, f.b() - f.a());
  const auto breaks = merged_breakpoints(f.a(), f.b(), f.size(), {-lambda});
  return bochner_norm_pieces(breaks, s, [&](double t) { return norm(steklov_value(f, lambda, t)); });
}

/// (dt sum_i ||f(t_i)||^s)^{1/s}, the rectangle-rule grid norm.
template <class F>
double grid_norm(const TimeSeries<F>& f, double s, const GramNorm& norm) {
  double sum = 0.0;
  for (int i = 0; i < f.size(); ++i) sum += std::pow(norm(FieldTraits<F>::coefficients(f[i])), s);
  return std::pow(f.dt() * sum, 1.0 / s);
}

/// max over node pairs s < t of ||f(t) - f(s) - trapezoid int_s^t f'||.
template <class F>
double newton_leibniz_residual(const TimeSeries<F>& f, const TimeSeries<F>& fprime, const std::function<double(const Vector&)>& norm) {
  require_same_grid(f, fprime, "newton_leibniz_residual");
  const int M = f.size();
  const double dt = f.dt();
  double worst = 0.0;
  for (int s = 0; s < M; ++s) {
    Vector integral = Vector::Zero(FieldTraits<F>::coefficients(f[0]).size());
    for (int t = s + 1; t < M; ++t) {
      integral += 0.5 * dt * (FieldTraits<F>::coefficients(fprime[t - 1]) + FieldTraits<F>::coefficients(fprime[t]));
      const Vector r = FieldTraits<F>::coefficients(f[t]) - FieldTraits<F>::coefficients(f[s]) - integral;
      worst = std::max(worst, norm(r));
    }
  }
  return worst;
}

/// Second-order finite-difference time derivative on the grid (one-sided at the ends).
template <class F>
TimeSeries<F> time_derivative(const TimeSeries<F>& f) {
  const int M = f.size();
  const double dt = f.dt();
  auto c = [&](int i) -> const Vector& { return FieldTraits<F>::coefficients(f[i]); };
  std::vector<F> out;
  out.reserve(M);
  for (int i = 0; i < M; ++i) {
    Vector d;
    if (M == 2) {
      d = (c(1) - c(0)) / dt;
    } else if (i == 0) {
      d = (-3.0 * c(0) + 4.0 * c(1) - c(2)) / (2.0 * dt);
    } else if (i == M - 1) {
      d = (3.0 * c(M - 1) - 4.0 * c(M - 2) + c(M - 3)) / (2.0 * dt);
    } else {
      d = (c(i + 1) - c(i - 1)) / (2.0 * dt);
    }
    out.push_back(FieldTraits<F>::make(f[i], std::move(d)));
  }
  return TimeSeries<F>(f.a(), f.b(), std::move(out));
}

}  // namespace presslens
