#include "presslens/projection.hpp"

#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>
#include <fmt/format.h>

#include "presslens/log.hpp"

namespace presslens {

GradientProjector::GradientProjector(MeshPtr mesh, int delta, std::optional<Region> mean_region)
    : GradientProjector(std::make_shared<const FemSpace>(std::move(mesh)), delta, std::move(mean_region)) {}

GradientProjector::GradientProjector(FemSpacePtr space, int delta, std::optional<Region> mean_region)
    : space_(std::move(space)), delta_(delta), solver_(std::make_shared<StokesSolver>(space_, delta, std::move(mean_region))) {
  solver_->report_estimate = false;
}

StokesSolution GradientProjector::solve(const DualFunctional& f) const { return solver_->solve(f); }

VectorField GradientProjector::project_velocity(const VectorField& v) const {
  space_->require_same_mesh(v.mesh(), "project_velocity");
  if (!v.zero_trace()) throw FieldError("project_velocity needs a zero-trace field");
  const StokesSolution s = solver_->solve(stiffness_functional(*space_, v, delta_));
  return VectorField(space_->mesh_ptr(), v.coefficients() - s.velocity.coefficients(), true);
}

DualFunctional GradientProjector::project_functional(const DualFunctional& f) const {
  return gradient_functional(*space_, associate_pressure(f).pressure);
}

AssociatePressure GradientProjector::associate_pressure(const DualFunctional& f) const {
  space_->require_same_mesh(f.mesh(), "associate_pressure");
  StokesSolution s = solver_->solve(f);
  return {std::move(s.pressure), solver_->mean_region(), f.provenance(), std::max(s.residual_momentum, s.residual_mass)};
}

VectorField project_velocity(const GradientProjector& P, const VectorField& v) { return P.project_velocity(v); }
DualFunctional project_functional(const GradientProjector& P, const DualFunctional& f) { return P.project_functional(f); }
AssociatePressure associate_pressure(const GradientProjector& P, const DualFunctional& f) { return P.associate_pressure(f); }

PoincareRatio weak_poincare_ratio(const MeshPtr& mesh, const Region& U, const std::vector<ScalarField>& samples, double q) {
  if (U.area(*mesh) <= 0.0) throw FieldError("weak_poincare_ratio: region has no area");
  auto space = std::make_shared<const FemSpace>(mesh);
  RieszSolver riesz(space, 0);
  PoincareRatio out;
  out.q = q;
  for (const auto& p : samples) {
    space->require_same_mesh(p.mesh(), "weak_poincare_ratio");
    const ScalarField centered = subtract_mean(p, &U);
    const double num = lq_norm(centered, q, &U);
    const double den = riesz.dual_norm(gradient_functional(*space, p));
    const double scale = p.coefficients().lpNorm<Eigen::Infinity>();
    if (centered.coefficients().lpNorm<Eigen::Infinity>() <= 1e-13 * scale || scale == 0.0 || den == 0.0) {
      log()->info("weak_poincare_ratio: constant sample skipped");
      ++out.skipped;
      continue;
    }
    out.ratio = std::max(out.ratio, num / den);
    ++out.used;
  }
  return out;
}

double phi_exponent(double q) {
  const double qp = q / (q - 1.0);
  return 2.0 / qp - 1.0;
}

double psi_exponent(double q) { return 2.0 / q; }

void require_scaled_pair(const TriangleMesh& unit, const TriangleMesh& scaled, double R, Point2 center) {
  if (!(R > 0.0)) throw MeshError("scaling factor must be positive");
  if (unit.num_vertices() != scaled.num_vertices() || unit.triangles() != scaled.triangles()) {
    throw MeshError("scaled mesh does not share the unit mesh topology");
  }
  const double tol = 1e-14 * (R + std::abs(center.x) + std::abs(center.y));
  for (std::size_t i = 0; i < unit.num_vertices(); ++i) {
    const Point2 expect = center + R * unit.vertices()[i];
    const Point2 got = scaled.vertices()[i];
    if (std::abs(expect.x - got.x) > tol || std::abs(expect.y - got.y) > tol) {
      throw MeshError(fmt::format("vertex {} is not the scaled unit vertex", i));
    }
  }
}

namespace {

void check_q(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw std::invalid_argument("scaling exponent q must lie in (1, inf)");
}

}  // namespace

VectorField scale_field(const VectorField& u_R, const MeshPtr& unit_mesh, double R, double q) {
  check_q(q);
  require_scaled_pair(*unit_mesh, *u_R.mesh(), R);
  return VectorField(unit_mesh, std::pow(R, phi_exponent(q)) * u_R.coefficients(), u_R.zero_trace());
}

ScalarField scale_field(const ScalarField& f_R, const MeshPtr& unit_mesh, double R, double q) {
  check_q(q);
  require_scaled_pair(*unit_mesh, *f_R.mesh(), R);
  return ScalarField(unit_mesh, std::pow(R, psi_exponent(q)) * f_R.coefficients());
}

VectorField unscale_field(const VectorField& u_1, const MeshPtr& scaled_mesh, double R, double q) {
  check_q(q);
  require_scaled_pair(*u_1.mesh(), *scaled_mesh, R);
  return VectorField(scaled_mesh, std::pow(R, -phi_exponent(q)) * u_1.coefficients(), u_1.zero_trace());
}

ScalarField unscale_field(const ScalarField& f_1, const MeshPtr& scaled_mesh, double R, double q) {
  check_q(q);
  require_scaled_pair(*f_1.mesh(), *scaled_mesh, R);
  return ScalarField(scaled_mesh, std::pow(R, -psi_exponent(q)) * f_1.coefficients());
}

DualFunctional push_functional(const DualFunctional& f_1, const MeshPtr& scaled_mesh, double R, double q) {
  check_q(q);
  require_scaled_pair(*f_1.mesh(), *scaled_mesh, R);
  return DualFunctional(scaled_mesh, std::pow(R, phi_exponent(q)) * f_1.load(), f_1.provenance());
}

std::vector<ScalingRow> check_scaling_invariance(const std::vector<double>& radii,
                                                 const std::function<DualFunctional(const FemSpace&)>& generator,
                                                 int level, int delta) {
  const MeshPtr unit = generate_disk_mesh({0, 0}, 1.0, level);
  const FemSpace unit_space(unit);
  const DualFunctional f1 = generator(unit_space);
  std::vector<ScalingRow> rows;
  for (double R : radii) {
    const MeshPtr mesh = generate_disk_mesh({0, 0}, R, level);
    auto space = std::make_shared<const FemSpace>(mesh);
    const DualFunctional fR = push_functional(f1, mesh, R, 2.0);
    GradientProjector P(space, delta);
    const AssociatePressure ap = P.associate_pressure(fR);
    ScalingRow row;
    row.R = R;
    row.dual_norm = RieszSolver(space, delta).dual_norm(fR);
    row.pressure_norm = lq_norm(ap.pressure, 2.0);
    row.ratio = row.pressure_norm / row.dual_norm;
    rows.push_back(row);
  }
  return rows;
}

double scaling_spread(const std::vector<ScalingRow>& rows) {
  if (rows.empty()) return 0.0;
  double spread = 0.0;
  for (const auto& r : rows) spread = std::max(spread, std::abs(r.ratio / rows.front().ratio - 1.0));
  return spread;
}

namespace {

struct Spectrum {
  int n;
  std::vector<std::complex<double>> x, y;
};

std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& in, int n, int sign) {
  std::vector<std::complex<double>> out(in.size());
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  // FFTW planning is not thread-safe
  static std::mutex planner;
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner);
    plan = fftw_plan_dft_2d(n, n, src, dst, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner);
  fftw_destroy_plan(plan);
  return out;
}

Spectrum forward(const PeriodicGrid& u) {
  const int n = u.n;
  if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument(fmt::format("FFT grid size must be a power of two >= 4, got {}", n));
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  if (u.ux.size() != nn || u.uy.size() != nn) throw std::invalid_argument("FFT grid sample count does not match N*N");
  std::vector<std::complex<double>> x(u.ux.begin(), u.ux.end()), y(u.uy.begin(), u.uy.end());
  return {n, transform(x, n, FFTW_FORWARD), transform(y, n, FFTW_FORWARD)};
}

// The Nyquist mode carries no derivative on a real grid; treating it as k = 0
// keeps the projected spectrum Hermitian.
int wavenumber(int i, int n) {
  if (2 * i == n) return 0;
  return i < n / 2 ? i : i - n;
}

}  // namespace

PeriodicGrid helmholtz_fft(const PeriodicGrid& u) {
  Spectrum s = forward(u);
  const int n = s.n;
  // row-major index j * N + i: the slow FFTW axis is y
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double kx = wavenumber(i, n), ky = wavenumber(j, n);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue;
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      const std::complex<double> kdotu = kx * s.x[idx] + ky * s.y[idx];
      s.x[idx] -= kx * kdotu / k2;
      s.y[idx] -= ky * kdotu / k2;
    }
  }
  const auto bx = transform(s.x, n, FFTW_BACKWARD);
  const auto by = transform(s.y, n, FFTW_BACKWARD);
  PeriodicGrid out{n, std::vector<double>(bx.size()), std::vector<double>(by.size())};
  const double norm = 1.0 / (static_cast<double>(n) * n);
  for (std::size_t k = 0; k < bx.size(); ++k) {
    out.ux[k] = bx[k].real() * norm;
    out.uy[k] = by[k].real() * norm;
  }
  return out;
}

double spectral_divergence(const PeriodicGrid& u) {
  const Spectrum s = forward(u);
  const int n = s.n;
  double div = 0.0, mag = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      const double kx = wavenumber(i, n), ky = wavenumber(j, n);
      div = std::max(div, std::abs(kx * s.x[idx] + ky * s.y[idx]));
      mag = std::max(mag, std::max(std::abs(s.x[idx]), std::abs(s.y[idx])));
    }
  }
  return mag == 0.0 ? 0.0 : div / mag;
}

}  // namespace presslens
