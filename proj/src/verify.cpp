#include "presslens/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

#include <Eigen/QR>
#include <fmt/format.h>

#include "presslens/cases.hpp"
#include "presslens/corpus.hpp"
#include "presslens/decomposition.hpp"
#include "presslens/gns.hpp"
#include "presslens/linalg.hpp"
#include "presslens/log.hpp"
#include "presslens/projection.hpp"
#include "presslens/stokes.hpp"
#include "presslens/time_series.hpp"

namespace presslens::verify {

using nlohmann::json;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
  json metrics = json::object();

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double rate(double coarse, double fine, double ratio = 2.0) { return std::log(coarse / fine) / std::log(ratio); }

std::vector<double> pairwise_rates(const std::vector<double>& e, double ratio = 2.0) {
  std::vector<double> r;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) r.push_back(rate(e[k], e[k + 1], ratio));
  return r;
}

double min_of(const std::vector<double>& v) { return v.empty() ? NAN : *std::min_element(v.begin(), v.end()); }
double max_of(const std::vector<double>& v) { return v.empty() ? NAN : *std::max_element(v.begin(), v.end()); }

std::string sci(double x) { return fmt::format("{:.3e}", x); }

MeshPtr unit_square(int n) { return generate_rect_mesh({0, 1}, {0, 1}, n); }

ScalarField random_p1(const MeshPtr& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Vector c(mesh->num_vertices());
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = dist(rng);
  return ScalarField(mesh, c);
}

VectorField random_zero_trace(const MeshPtr& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Vector c(2 * (mesh->num_vertices() + mesh->num_edges()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = dist(rng);
  return VectorField(mesh, c).with_zero_trace();
}

// --- 1 ------------------------------------------------------------------------

Outcome projection_algebra(int) {
  Outcome out;
  std::mt19937_64 rng(101);
  auto mesh = unit_square(16);
  auto space = std::make_shared<const FemSpace>(mesh);
  for (int delta : {0, 1}) {
    GradientProjector P(space, delta);
    StokesSolver complement(space, delta);
    complement.report_estimate = false;
    double idem = 0, kernel = 0, div = 0, grad = 0;
    for (int k = 0; k < 20; ++k) {
      const auto v = random_zero_trace(mesh, rng);
      const auto ev = P.project_velocity(v);
      idem = std::max(idem, (P.project_velocity(ev).coefficients() - ev.coefficients()).norm() / ev.coefficients().norm());

      // divergence-free field from an independent Stokes solve with load (K + delta M) w
      const auto psi = complement.solve(stiffness_functional(*space, random_zero_trace(mesh, rng), delta)).velocity;
      div = std::max(div, (space->divergence() * psi.coefficients()).norm() / psi.coefficients().norm());
      kernel = std::max(kernel, P.project_velocity(psi).coefficients().norm() / psi.coefficients().norm());

      const auto g = gradient_functional(*space, random_p1(mesh, rng));
      grad = std::max(grad, (P.project_functional(g).load() - g.load()).norm() / g.load().norm());
    }
    const std::string tag = fmt::format("delta{}", delta);
    out.metrics[tag] = {{"idempotency", idem}, {"kernel", kernel}, {"kernel_divergence", div}, {"gradient_fixed", grad}};
    out.require(idem <= 1e-10, tag + " E^2 != E: " + sci(idem));
    out.require(kernel <= 1e-10, tag + " E psi != 0: " + sci(kernel));
    out.require(div <= 1e-10, tag + " test fields not divergence free: " + sci(div));
    out.require(grad <= 1e-10, tag + " E* grad p != grad p: " + sci(grad));
  }
  if (out.passed) {
    out.detail = fmt::format("n=16, 20 samples per identity, worst {}",
                             sci(std::max({out.metrics["delta0"]["idempotency"].get<double>(), out.metrics["delta0"]["kernel"].get<double>(),
                                           out.metrics["delta0"]["gradient_fixed"].get<double>(), out.metrics["delta1"]["idempotency"].get<double>(),
                                           out.metrics["delta1"]["kernel"].get<double>(), out.metrics["delta1"]["gradient_fixed"].get<double>()})));
  }
  return out;
}

// --- 2 ------------------------------------------------------------------------

// Divergence-free energy projection Z (Z^T A Z)^{-1} Z^T A v with Z an orthonormal
// basis of ker B_I from a full QR of B_I^T.
Vector dense_div_free_part(const FemSpace& space, const Vector& v, int delta) {
  const auto& dofs = space.interior_velocity_dofs();
  std::vector<int> rows(space.num_vertices());
  for (int i = 0; i < space.num_vertices(); ++i) rows[i] = i;
  const Eigen::MatrixXd a = Eigen::MatrixXd(extract_block(space.velocity_operator(delta), dofs, dofs));
  const Eigen::MatrixXd b = Eigen::MatrixXd(extract_block(space.divergence(), rows, dofs));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b.transpose());
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd z = q.rightCols(q.cols() - qr.rank());
  const Vector vi = gather(v, dofs);
  const Vector coef = (z.transpose() * a * z).ldlt().solve(z.transpose() * a * vi);
  Vector full = Vector::Zero(v.size());
  scatter(z * coef, dofs, full);
  return full;
}

Outcome dense_oracle(int) {
  Outcome out;
  std::mt19937_64 rng(202);
  double worst = 0;
  json rows = json::array();
  for (int n : {2, 3, 4, 5}) {
    auto mesh = generate_rect_mesh({0, 1.5}, {-0.5, 0.5}, n);
    auto space = std::make_shared<const FemSpace>(mesh);
    const int unknowns = space->num_velocity_dofs() + space->num_vertices();
    out.require(unknowns <= 300, fmt::format("n={} has {} unknowns", n, unknowns));
    for (int delta : {0, 1}) {
      GradientProjector P(space, delta);
      for (int k = 0; k < 3; ++k) {
        const auto v = random_zero_trace(mesh, rng);
        const Vector expect = v.coefficients() - dense_div_free_part(*space, v.coefficients(), delta);
        const double e = (P.project_velocity(v).coefficients() - expect).norm() / v.coefficients().norm();
        worst = std::max(worst, e);
      }
      rows.push_back({{"n", n}, {"delta", delta}, {"unknowns", unknowns}});
    }
  }
  out.metrics = {{"cases", rows}, {"max_relative_deviation", worst}};
  out.require(worst <= 1e-9, "dense oracle deviation " + sci(worst));
  if (out.passed) out.detail = fmt::format("{} cases up to {} unknowns, max deviation {}", rows.size() * 3, rows.back()["unknowns"].get<int>(), sci(worst));
  return out;
}

// --- 3 ------------------------------------------------------------------------

Outcome stokes_convergence(int) {
  using corpus::BubbleStokes;
  Outcome out;
  std::vector<double> eu, ep;
  const std::vector<int> ns = {4, 8, 16, 32};
  for (int n : ns) {
    auto mesh = unit_square(n);
    FemSpace space(mesh);
    const auto s = solve_stokes(mesh, load_functional(space, BubbleStokes::forcing), 0);
    eu.push_back(l2_error(s.velocity, BubbleStokes::velocity));
    ep.push_back(l2_error(s.pressure, BubbleStokes::pressure, nullptr, true));
  }
  const auto ru = pairwise_rates(eu), rp = pairwise_rates(ep);
  out.metrics = {{"n", ns}, {"velocity_error", eu}, {"pressure_error", ep}, {"velocity_rates", ru}, {"pressure_rates", rp}};
  out.require(min_of(ru) >= 2.7, "velocity rate " + fmt::format("{:.3f}", min_of(ru)));
  out.require(min_of(rp) >= 1.8, "pressure rate " + fmt::format("{:.3f}", min_of(rp)));
  if (out.passed) out.detail = fmt::format("min rates velocity {:.3f}, pressure {:.3f}", min_of(ru), min_of(rp));
  return out;
}

// --- 4 ------------------------------------------------------------------------

Outcome scaling_invariance(int) {
  Outcome out;
  const std::vector<double> radii = {0.5, 1.0, 2.0, 4.0};
  const std::map<std::string, std::function<DualFunctional(const FemSpace&)>> generators = {
      {"gradient", [](const FemSpace& s) {
         return gradient_functional(s, interpolate_scalar(s.mesh_ptr(), [](Point2 x) { return x.x * x.x * x.y - x.y; }));
       }},
      {"generic", [](const FemSpace& s) {
         return load_functional(s, [](Point2 x) { return std::array<double, 2>{std::cos(x.y), x.x * x.y}; });
       }}};
  double worst = 0;
  for (const auto& [name, gen] : generators) {
    const auto rows = check_scaling_invariance(radii, gen, 3);
    json table = json::array();
    for (const auto& r : rows) table.push_back({{"R", r.R}, {"ratio", r.ratio}, {"dual_norm", r.dual_norm}, {"pressure_norm", r.pressure_norm}});
    const double spread = scaling_spread(rows);
    worst = std::max(worst, spread);
    out.metrics[name] = {{"table", table}, {"spread", spread}};
    out.require(spread <= 1e-10, name + " spread " + sci(spread));
  }
  if (out.passed) out.detail = fmt::format("R in {{0.5,1,2,4}}, max relative spread {}", sci(worst));
  return out;
}

// --- 5 ------------------------------------------------------------------------

TimeSeries<ScalarField> random_series(const MeshPtr& mesh, double a, double b, int M, std::mt19937_64& rng, bool compact) {
  std::vector<ScalarField> v;
  for (int i = 0; i < M; ++i) {
    auto f = random_p1(mesh, rng);
    if (compact && (i == 0 || i == M - 1)) f *= 0.0;
    v.push_back(f);
  }
  return TimeSeries<ScalarField>(a, b, v);
}

Outcome steklov_identities(int) {
  Outcome out;
  std::mt19937_64 rng(505);
  auto mesh = unit_square(2);
  FemSpace space(mesh);
  const GramNorm l2{space.p1_mass()};

  double adjoint = 0;
  std::uniform_real_distribution<double> lam(-0.9, 0.9);
  for (int k = 0; k < 10; ++k) {
    const int M = 5 + static_cast<int>(rng() % 20);
    const auto f = random_series(mesh, 0.0, 1.0, M, rng, true);
    const auto g = random_series(mesh, 0.0, 1.0, M, rng, true);
    double l = lam(rng);
    if (std::abs(l) < 1e-3) l = 0.05;
    const auto [lhs, rhs] = steklov_adjoint_sides(f, g, l);
    adjoint = std::max(adjoint, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }

  int tested = 0, violated = 0;
  double worst_ratio = 0;
  for (int k = 0; k < 5; ++k) {
    const auto f = random_series(mesh, 0.0, 2.0, 17, rng, k % 2 == 0);
    for (double l : {f.dt(), f.dt() / 2, f.dt() / 4, 0.37, -0.8, 1.9, -2.0}) {
      for (double s : {1.0, 1.5, 2.0, 4.0}) {
        const double ratio = steklov_bochner_norm(f, l, s, l2) / bochner_norm(f, s, l2);
        worst_ratio = std::max(worst_ratio, ratio);
        ++tested;
        if (ratio > 1 + 1e-12) ++violated;
      }
    }
  }

  auto maxabs = [](const Vector& r) { return r.lpNorm<Eigen::Infinity>(); };
  const auto p = random_p1(mesh, rng);
  const auto zero = ScalarField::zero(mesh);
  const auto c = make_series<ScalarField>(0.0, 3.0, 13, [&](double) { return p; });
  const auto z = make_series<ScalarField>(0.0, 3.0, 13, [&](double) { return zero; });
  const auto lin = make_series<ScalarField>(0.0, 3.0, 13, [&](double t) { return t * p; });
  const auto quad = make_series<ScalarField>(0.0, 3.0, 13, [&](double t) { return t * t * p; });
  const auto dquad = make_series<ScalarField>(0.0, 3.0, 13, [&](double t) { return 2 * t * p; });
  const double nl = std::max({newton_leibniz_residual(c, z, maxabs), newton_leibniz_residual(lin, c, maxabs),
                              newton_leibniz_residual(quad, dquad, maxabs)});

  out.metrics = {{"adjoint_max_relative", adjoint}, {"norm_bound_tested", tested}, {"norm_bound_violations", violated},
                 {"norm_bound_worst_ratio", worst_ratio}, {"newton_leibniz_max", nl}};
  out.require(adjoint <= 1e-12, "adjoint identity " + sci(adjoint));
  out.require(violated == 0, fmt::format("norm bound violated in {} of {} cases", violated, tested));
  out.require(nl <= 1e-13, "Newton-Leibniz residual " + sci(nl));
  if (out.passed)
    out.detail = fmt::format("adjoint {}, norm bound {}/{} (worst ratio {:.4f}), Newton-Leibniz {}", sci(adjoint), tested, tested, worst_ratio, sci(nl));
  return out;
}

// --- 6 ------------------------------------------------------------------------

GnsOptions gns_options(int threads, bool reports = true) {
  GnsOptions o;
  o.decompose.threads = threads;
  o.decompose.compute_reports = reports;
  return o;
}

Outcome potential_flow_decomposition(int threads) {
  using PF = corpus::PotentialFlow;
  Outcome out;
  const std::vector<int> ns = {8, 16, 32, 64};
  std::vector<double> eh, e0;
  std::vector<int> sigmas;
  for (int n : ns) {
    const auto gd = gns_decompose(cases::potential_flow(n, 33), gns_options(threads));
    sigmas.push_back(gd.dec.sigma);
    eh.push_back(spacetime_relative_error(gd.dec.p_h, PF::harmonic_pressure));
    e0.push_back(spacetime_relative_error(gd.dec.p_0, PF::forcing_pressure));
  }
  const std::vector<int> Ms = {33, 65, 129};
  std::vector<double> wi;
  for (int M : Ms) {
    const auto gd = gns_decompose(cases::potential_flow(ns.back(), M), gns_options(threads));
    wi.push_back(gd.dec.weak_identity.residual);
  }
  const auto rh = pairwise_rates(eh), r0 = pairwise_rates(e0), rw = pairwise_rates(wi);
  out.metrics = {{"n", ns}, {"M", 33}, {"sigma", sigmas}, {"p_h_error", eh}, {"p_h_rates", rh}, {"p_0_error", e0}, {"p_0_rates", r0},
                 {"weak_identity_n", ns.back()}, {"weak_identity_M", Ms}, {"weak_identity_residual", wi}, {"weak_identity_rates", rw}};
  out.require(min_of(rh) >= 1.5, fmt::format("p_h rate {:.3f}", min_of(rh)));
  out.require(min_of(r0) >= 0.9, fmt::format("p_0 rate {:.3f}", min_of(r0)));
  out.require(min_of(rw) >= 1.9, fmt::format("weak identity time rate {:.3f}", min_of(rw)));
  if (out.passed)
    out.detail = fmt::format("rates p_h {:.3f}, p_0 {:.3f}, weak identity dt-rate {:.3f}", min_of(rh), min_of(r0), min_of(rw));
  return out;
}

// --- 7 ------------------------------------------------------------------------

// Values below this are round-off; a sequence there counts as decayed.
constexpr double harmonicity_floor = 1e-10;

struct HarmonicityStudy {
  double min_rate = INFINITY;
  double max_value = 0;
  json table = json::array();
  bool passed = true;
};

HarmonicityStudy harmonicity_study(const std::function<GnsProblem(int)>& make, const std::vector<int>& ns, int threads) {
  HarmonicityStudy s;
  std::vector<std::vector<double>> per_level;
  std::vector<double> times;
  for (int n : ns) {
    const auto prob = make(n);
    const auto gd = gns_decompose(prob, gns_options(threads));
    per_level.push_back(gd.dec.harmonicity);
    if (times.empty())
      for (int i = 0; i < gd.dec.p_h.size(); ++i) times.push_back(gd.dec.p_h.time(i));
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> values;
    for (const auto& lvl : per_level) values.push_back(lvl[i]);
    s.max_value = std::max(s.max_value, max_of(values));
    json row = {{"t", times[i]}, {"values", values}};
    if (values.front() <= harmonicity_floor && max_of(values) <= harmonicity_floor) {
      row["round_off"] = true;
    } else {
      const auto r = pairwise_rates(values);
      row["rates"] = r;
      s.min_rate = std::min(s.min_rate, min_of(r));
      if (min_of(r) < 1.0) s.passed = false;
    }
    s.table.push_back(row);
  }
  return s;
}

struct ContinuityStudy {
  std::vector<double> increments;
  double ratio = 0;
};

ContinuityStudy continuity_study(const std::function<GnsProblem(int)>& make, const std::vector<int>& Ms, int threads) {
  ContinuityStudy c;
  for (int M : Ms) c.increments.push_back(gns_decompose(make(M), gns_options(threads)).dec.continuity.max_increment);
  c.ratio = c.increments[1] / c.increments[0];
  return c;
}

Outcome harmonicity_continuity(int threads) {
  Outcome out;
  const std::vector<int> ns = {8, 16, 32};
  const auto pf = harmonicity_study([](int n) { return cases::potential_flow(n, 9); }, ns, threads);
  const auto tg = harmonicity_study([](int n) { return cases::taylor_green(n, 9); }, ns, threads);
  const auto pfc = continuity_study([](int M) { return cases::potential_flow(32, M); }, {17, 33}, threads);
  const auto tgc = continuity_study([](int M) { return cases::taylor_green(32, M); }, {17, 33}, threads);
  auto rate_json = [](double r) { return std::isfinite(r) ? json(r) : json(nullptr); };
  out.metrics = {{"n", ns},
                 {"M", 9},
                 {"potential_flow", {{"per_time", pf.table}, {"min_rate", rate_json(pf.min_rate)}, {"max_value", pf.max_value}}},
                 {"taylor_green", {{"per_time", tg.table}, {"min_rate", rate_json(tg.min_rate)}, {"max_value", tg.max_value}}},
                 {"continuity", {{"n", 32},
                                 {"M", {17, 33}},
                                 {"potential_flow", {{"max_increment", pfc.increments}, {"ratio", pfc.ratio}}},
                                 {"taylor_green", {{"max_increment", tgc.increments}, {"ratio", tgc.ratio}}}}}};
  out.require(pf.passed, fmt::format("potential-flow harmonicity rate {:.3f}", pf.min_rate));
  out.require(tg.passed, fmt::format("Taylor-Green harmonicity rate {:.3f}", tg.min_rate));
  out.require(std::abs(pfc.ratio - 0.5) <= 0.05, fmt::format("potential-flow continuity ratio {:.3f}", pfc.ratio));
  out.require(std::abs(tgc.ratio - 0.5) <= 0.05, fmt::format("Taylor-Green continuity ratio {:.3f}", tgc.ratio));
  if (out.passed) {
    const std::string pf_text = std::isfinite(pf.min_rate) ? fmt::format("{:.3f}", pf.min_rate) : "round-off (max " + sci(pf.max_value) + ")";
    out.detail = fmt::format("harmonicity min rate TG {:.3f}, PF {}; continuity ratio PF {:.3f}, TG {:.3f}", tg.min_rate, pf_text,
                             pfc.ratio, tgc.ratio);
  }
  return out;
}

// --- 8 ------------------------------------------------------------------------

Outcome gns_total_pressure(int threads) {
  Outcome out;
  const corpus::TaylorGreen tg(1.0);
  const std::vector<int> ns = {8, 16, 32}, Ms = {9, 17, 33};
  std::vector<double> err;
  for (std::size_t l = 0; l < ns.size(); ++l) {
    const auto gd = gns_decompose(cases::taylor_green(ns[l], Ms[l]), gns_options(threads, false));
    err.push_back(spacetime_relative_error(total_pressure(gd.dec), [&](Point2 x, double t) { return tg.pressure(x, t); }));
  }
  out.metrics = {{"n", ns}, {"M", Ms}, {"relative_error", err}, {"rates", pairwise_rates(err)}};
  for (std::size_t l = 0; l + 1 < err.size(); ++l)
    out.require(err[l + 1] < err[l], fmt::format("error not decreasing at level {}: {} -> {}", l + 1, sci(err[l]), sci(err[l + 1])));
  if (out.passed) out.detail = fmt::format("relative errors {}, {}, {}", sci(err[0]), sci(err[1]), sci(err[2]));
  return out;
}

// --- 9 ------------------------------------------------------------------------

// Taylor-Green with the isotropic forcing f = g I. div f = grad g only shifts the
// pressure, so u still solves the balance law and the gate passes.
GnsProblem forced_taylor_green(int n, int M) {
  auto prob = cases::taylor_green(n, M);
  const auto& mesh = prob.G.parent;
  auto g = make_series<ScalarField>(prob.u.a(), prob.u.b(), M, [&](double t) {
    return interpolate_scalar(mesh, [t](Point2 x) { return (1 + t) * (x.x * x.y - 0.5 * x.x); });
  });
  auto zero = make_series<ScalarField>(prob.u.a(), prob.u.b(), M, [&](double) { return ScalarField::zero(mesh); });
  prob.forcing = {g, zero, zero, g};
  return prob;
}

Outcome linearity_splits(int threads) {
  Outcome out;
  const std::vector<std::pair<std::string, std::function<GnsProblem()>>> problems = {
      {"potential_flow", [] { return cases::potential_flow(16, 9); }},
      {"taylor_green", [] { return cases::taylor_green(16, 9); }},
      {"forced_taylor_green", [] { return forced_taylor_green(16, 9); }}};
  double worst = 0;
  for (const auto& [name, make] : problems) {
    const auto gd = gns_decompose(make(), gns_options(threads, false));
    const double rel = gd.split_residual / gd.split_scale;
    worst = std::max(worst, rel);
    std::vector<double> part_max;
    for (const auto& part : gd.parts) {
      double m = 0;
      for (int i = 0; i < part.size(); ++i) m = std::max(m, part[i].coefficients().lpNorm<Eigen::Infinity>());
      part_max.push_back(m);
    }
    out.metrics[name] = {{"split_residual", gd.split_residual}, {"scale", gd.split_scale}, {"relative", rel}, {"part_max", part_max}};
    out.require(gd.split_residual <= 1e-11 * gd.split_scale, name + " split residual " + sci(rel));
  }
  if (out.passed) out.detail = fmt::format("3 problems, max split residual {} x scale", sci(worst));
  return out;
}

// --- 10 -----------------------------------------------------------------------

struct Stability {
  double worst = 0;  // max |fine / coarse - 1|
  bool finite = true;
  void add(double coarse, double fine) {
    if (!std::isfinite(coarse) || !std::isfinite(fine) || coarse <= 0 || fine <= 0) {
      finite = false;
      return;
    }
    worst = std::max(worst, std::abs(fine / coarse - 1));
  }
};

Outcome poincare_constants(int threads) {
  Outcome out;
  const std::vector<int> ns = {16, 32};

  // weak Poincare on the unit square, U = Omega
  Stability poincare;
  json poincare_rows = json::array();
  const std::vector<double> qs = {2.0, 4.0, 1.5};
  std::map<double, std::vector<double>> by_q;
  for (int n : ns) {
    auto mesh = unit_square(n);
    const std::vector<ScalarField> samples = {interpolate_scalar(mesh, [](Point2 p) { return p.x; }),
                                              interpolate_scalar(mesh, [](Point2 p) { return std::cos(2 * p.x) * p.y; }),
                                              interpolate_scalar(mesh, [](Point2 p) { return p.x * p.x - p.y * p.y + 0.3 * p.x * p.y; })};
    for (double q : qs) {
      const auto r = weak_poincare_ratio(mesh, Region::whole(*mesh), samples, q);
      by_q[q].push_back(r.ratio);
      poincare_rows.push_back({{"n", n}, {"q", q}, {"ratio", r.ratio}, {"used", r.used}});
    }
  }
  for (double q : qs) poincare.add(by_q[q][0], by_q[q][1]);

  // boundedness of the associate pressure on a subdomain
  Stability bounded;
  std::vector<double> cg;
  for (int n : ns) {
    auto mesh = unit_square(n);
    auto space = std::make_shared<const FemSpace>(mesh);
    GradientProjector P(space);
    RieszSolver riesz(space, 0);
    const Region G = Region::from_predicate(*mesh, [](Point2 c) { return std::abs(c.x - 0.5) < 0.25 && std::abs(c.y - 0.5) < 0.25; });
    const auto f = load_functional(*space, [](Point2 x) { return std::array<double, 2>{std::sin(3 * x.y), x.x * x.x}; });
    cg.push_back(lq_norm(P.associate_pressure(f).pressure, 2.0, &G) / riesz.dual_norm(f));
  }
  bounded.add(cg[0], cg[1]);

  // gradient estimate of p_h on the potential-flow corpus
  Stability gradient;
  json gradient_rows = json::array();
  for (double q : {2.0, 4.0}) {
    std::vector<std::vector<GradientEstimateRow>> levels;
    for (int n : ns) {
      const auto prob = cases::potential_flow(n, 9);
      const auto gd = gns_decompose(prob, gns_options(threads, false));
      levels.push_back(gradient_estimate(gd.dec, prob.u, q));
    }
    for (std::size_t i = 0; i < levels[0].size(); ++i) {
      gradient.add(levels[0][i].ratio, levels[1][i].ratio);
      gradient_rows.push_back({{"q", q}, {"t", levels[0][i].t}, {"ratio", {levels[0][i].ratio, levels[1][i].ratio}}});
    }
  }

  // per-part bounds of the forcing pressure on the forced Taylor-Green corpus
  Stability split;
  json split_rows = json::array();
  std::vector<std::vector<SplitEstimateRow>> split_levels;
  for (int n : ns) split_levels.push_back(split_estimates(gns_decompose(forced_taylor_green(n, 9), gns_options(threads, false))));
  if (split_levels[0].size() != split_levels[1].size()) {
    split.finite = false;
  } else {
    for (std::size_t i = 0; i < split_levels[0].size(); ++i) {
      const auto& a = split_levels[0][i];
      const auto& b = split_levels[1][i];
      split.add(a.ratio, b.ratio);
      split_rows.push_back({{"part", a.part}, {"t", a.t}, {"ratio", {a.ratio, b.ratio}}});
    }
  }

  out.metrics = {{"n", ns},
                 {"weak_poincare", {{"rows", poincare_rows}, {"max_change", poincare.worst}}},
                 {"pressure_bound", {{"ratio", cg}, {"max_change", bounded.worst}}},
                 {"gradient_estimate", {{"rows", gradient_rows}, {"max_change", gradient.worst}}},
                 {"split_estimate", {{"rows", split_rows}, {"max_change", split.worst}}}};
  const std::pair<const char*, const Stability*> all[] = {
      {"weak Poincare", &poincare}, {"pressure bound", &bounded}, {"gradient estimate", &gradient}, {"split estimate", &split}};
  for (const auto& [name, s] : all) {
    out.require(s->finite, std::string(name) + " ratio not finite or positive");
    out.require(s->worst <= 0.25, fmt::format("{} ratio changed by {:.1f}%", name, 100 * s->worst));
  }
  if (out.passed)
    out.detail = fmt::format("max change under refinement: Poincare {:.1f}%, pressure bound {:.1f}%, gradient {:.1f}%, split {:.1f}%",
                             100 * poincare.worst, 100 * bounded.worst, 100 * gradient.worst, 100 * split.worst);
  return out;
}

struct CheckSpec {
  std::string title;
  double budget;
  std::function<Outcome(int)> run;
};

const std::map<std::string, CheckSpec>& registry() {
  static const std::map<std::string, CheckSpec> r = {
      {"projection_algebra", {"projection algebra", 10, projection_algebra}},
      {"dense_oracle", {"dense nullspace oracle", 5, dense_oracle}},
      {"stokes_convergence", {"manufactured Stokes convergence", 60, stokes_convergence}},
      {"scaling_invariance", {"scaling invariance", 30, scaling_invariance}},
      {"steklov_identities", {"Steklov identities", 5, steklov_identities}},
      {"potential_flow_decomposition", {"potential-flow decomposition", 300, potential_flow_decomposition}},
      {"harmonicity_continuity", {"harmonicity and continuity", 120, harmonicity_continuity}},
      {"gns_total_pressure", {"Taylor-Green total pressure", 300, gns_total_pressure}},
      {"linearity_splits", {"linearity splits", 60, linearity_splits}},
      {"poincare_constants", {"weak Poincare and boundedness constants", 120, poincare_constants}},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"projection_algebra",  "dense_oracle",
                                                 "stokes_convergence",  "scaling_invariance",
                                                 "steklov_identities",  "potential_flow_decomposition",
                                                 "harmonicity_continuity", "gns_total_pressure",
                                                 "linearity_splits",    "poincare_constants"};
  return names;
}

CheckResult run_check(const std::string& name, int threads) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown check '" + name + "'");
  const auto& spec = it->second;
  CheckResult r;
  r.name = name;
  r.title = spec.title;
  r.budget = spec.budget;
  log()->info("check {} started", name);
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = spec.run(threads);
  } catch (const std::exception& e) {
    o.passed = false;
    o.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.passed = o.passed;
  r.detail = o.detail;
  r.metrics = std::move(o.metrics);
  if (r.seconds > r.budget) {
    r.passed = false;
    r.detail += fmt::format("{}runtime {:.1f} s over budget {:.0f} s", r.detail.empty() ? "" : "; ", r.seconds, r.budget);
  }
  log()->info("check {} {} in {:.2f} s", name, r.passed ? "passed" : "failed", r.seconds);
  return r;
}

std::vector<CheckResult> run_checks(const std::vector<std::string>& names, int threads) {
  for (const auto& n : names)
    if (!registry().count(n)) throw std::invalid_argument("unknown check '" + n + "'");
  std::vector<CheckResult> out;
  for (const auto& n : names) out.push_back(run_check(n, threads));
  return out;
}

json to_json(const CheckResult& r) {
  return {{"name", r.name}, {"title", r.title}, {"passed", r.passed}, {"seconds", r.seconds},
          {"budget_seconds", r.budget}, {"detail", r.detail}, {"metrics", r.metrics}};
}

json summary_json(const std::vector<CheckResult>& results) {
  json checks = json::array(), failures = json::array();
  bool all = true;
  for (const auto& r : results) {
    checks.push_back(to_json(r));
    if (!r.passed) {
      all = false;
      failures.push_back(r.name);
    }
  }
  return {{"passed", all}, {"checks", checks}, {"failures", failures}};
}

}  // namespace presslens::verify
