#include "presslens/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <Eigen/SparseCholesky>

#include "presslens/linalg.hpp"
#include "presslens/log.hpp"
#include "presslens/parallel.hpp"

namespace presslens {

double bump(int j, double a, double b, double t) {
  if (t < a || t > b) return 0.0;
  const double h = 0.5 * (b - a);
  return std::pow((t - a) * (b - t) / (h * h), j);
}

double bump_derivative(int j, double a, double b, double t) {
  if (t < a || t > b) return 0.0;
  const double h = 0.5 * (b - a);
  const double base = (t - a) * (b - t) / (h * h);
  return j * std::pow(base, j - 1) * (a + b - 2.0 * t) / (h * h);
}

std::string to_string(TestBankKind k) { return k == TestBankKind::riesz ? "riesz" : "curl-bubble"; }

TestBankKind test_bank_kind_from_string(const std::string& s) {
  if (s == "riesz") return TestBankKind::riesz;
  if (s == "curl-bubble") return TestBankKind::curl_bubble;
  throw std::invalid_argument("unknown test bank kind '" + s + "'");
}

namespace {

struct Box {
  double x0, x1, y0, y1;
};

Box bounding_box(const TriangleMesh& mesh) {
  Box b{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(), std::numeric_limits<double>::max(),
        std::numeric_limits<double>::lowest()};
  for (const auto& v : mesh.vertices()) {
    b.x0 = std::min(b.x0, v.x);
    b.x1 = std::max(b.x1, v.x);
    b.y0 = std::min(b.y0, v.y);
    b.y1 = std::max(b.y1, v.y);
  }
  return b;
}

std::pair<int, int> frequencies(int k) { return {1 + k % 3, 1 + k / 3}; }

// Exact time integral of the linear interpolant of nodal values times a
// polynomial weight of degree <= 6.
double integrate_linear_times(const std::vector<double>& values, double a, double b,
                              const std::function<double(double)>& weight) {
  const int M = static_cast<int>(values.size());
  const double dt = (b - a) / (M - 1);
  const auto& rule = gauss_legendre_01(4);
  double sum = 0.0;
  for (int i = 0; i + 1 < M; ++i) {
    const double lo = a + i * dt;
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double r = rule.points[q];
      local += rule.weights[q] * ((1.0 - r) * values[i] + r * values[i + 1]) * weight(lo + r * dt);
    }
    sum += local * dt;
  }
  return sum;
}

double trapezoid(const std::vector<double>& values, double dt) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
    s += w * values[i];
  }
  return s * dt;
}

std::vector<int> interior_vertices(const TriangleMesh& mesh) {
  std::vector<int> out;
  const auto& flags = mesh.boundary_vertex_flags();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

template <class F>
void require_mesh(const TimeSeries<F>& s, const MeshPtr& mesh, const char* what) {
  if (s.mesh() != mesh) throw FieldError(std::string(what) + ": series is not on the expected mesh");
}

// Pairings of every bank field with every node of the data and pressure series.
struct BankPairings {
  std::vector<std::vector<double>> f, m, bh, b0;
};

// residual for one bank entry and one sigma applied to the unsigned p_0 pairings
struct WeakTerms {
  double residual = 0.0;
  double magnitude = 0.0;
};

WeakTerms weak_terms(const std::vector<double>& f, const std::vector<double>& m, const std::vector<double>& bh,
                     const std::vector<double>& b0, double sigma0, int j, double a, double b, double dt) {
  const auto eta = [&](double t) { return bump(j, a, b, t); };
  const auto deta = [&](double t) { return bump_derivative(j, a, b, t); };
  const double data_f = integrate_linear_times(f, a, b, eta);
  const double data_m = integrate_linear_times(m, a, b, deta);
  const int M = static_cast<int>(f.size());
  std::vector<double> ph(M), p0(M);
  for (int i = 0; i < M; ++i) {
    const double t = i == M - 1 ? b : a + i * dt;
    ph[i] = bh[i] * deta(t);
    p0[i] = sigma0 * b0[i] * eta(t);
  }
  const double side_h = trapezoid(ph, dt);
  const double side_0 = trapezoid(p0, dt);
  WeakTerms out;
  out.residual = std::abs(data_f - data_m + side_h - side_0);
  out.magnitude = std::max({std::abs(data_f), std::abs(data_m), std::abs(side_h), std::abs(side_0)});
  return out;
}

WeakIdentityReport weak_report(const BankPairings& P, const TestBank& bank, double sigma0, double a, double b,
                               double dt) {
  WeakIdentityReport rep;
  rep.dt = dt;
  double mag = 0.0;
  for (std::size_t k = 0; k < P.f.size(); ++k) {
    for (int j : bank.powers) {
      const auto w = weak_terms(P.f[k], P.m[k], P.bh[k], P.b0[k], sigma0, j, a, b, dt);
      rep.residual = std::max(rep.residual, w.residual);
      mag = std::max(mag, w.magnitude);
    }
  }
  rep.relative = mag > 0.0 ? rep.residual / mag : 0.0;
  rep.constant = rep.residual / (dt * dt);
  return rep;
}

BankPairings pair_bank(const FemSpace& space, const TestBank& bank, const TimeSeries<DualFunctional>& F,
                       const TimeSeries<DualFunctional>& Mu, const TimeSeries<ScalarField>* p_h,
                       const TimeSeries<ScalarField>* p_0) {
  BankPairings P;
  const int M = F.size();
  const SparseMatrix& B = space.divergence();
  for (const auto& psi : bank.psi) {
    const Vector div_psi = B * psi.coefficients();
    std::vector<double> f(M), m(M), bh(M, 0.0), b0(M, 0.0);
    for (int i = 0; i < M; ++i) {
      f[i] = F[i].pair(psi);
      m[i] = Mu[i].pair(psi);
      if (p_h) bh[i] = (*p_h)[i].coefficients().dot(div_psi);
      if (p_0) b0[i] = (*p_0)[i].coefficients().dot(div_psi);
    }
    P.f.push_back(std::move(f));
    P.m.push_back(std::move(m));
    P.bh.push_back(std::move(bh));
    P.b0.push_back(std::move(b0));
  }
  return P;
}

class HarmonicityOperator {
 public:
  explicit HarmonicityOperator(const FemSpace& space) : space_(space), interior_(interior_vertices(space.mesh())) {
    kii_ = extract_block(space.p1_stiffness(), interior_, interior_);
    if (!interior_.empty()) {
      factor_.compute(kii_);
      if (factor_.info() != Eigen::Success) throw SolverError("harmonicity: interior stiffness factorization failed", 0.0);
    }
  }

  double operator()(const ScalarField& p) const {
    const Vector& c = p.coefficients();
    const double grad_norm = std::sqrt(std::max(0.0, c.dot(space_.p1_stiffness() * c)));
    if (interior_.empty() || grad_norm == 0.0) return 0.0;
    const Vector r = gather(Vector(space_.p1_stiffness() * c), interior_);
    const Vector z = factor_.solve(r);
    return std::sqrt(std::max(0.0, r.dot(z))) / grad_norm;
  }

 private:
  const FemSpace& space_;
  std::vector<int> interior_;
  SparseMatrix kii_;
  Eigen::SimplicialLDLT<SparseMatrix> factor_;
};

ContinuityReport continuity_impl(const TimeSeries<ScalarField>& p_h, const std::vector<int>& interior,
                                 const TimeSeries<DualFunctional>* embedded, const RieszSolver* riesz) {
  ContinuityReport rep;
  double ratio = 0.0;
  for (int i = 0; i + 1 < p_h.size(); ++i) {
    ContinuityRow row;
    row.t0 = p_h.time(i);
    row.t1 = p_h.time(i + 1);
    const Vector d = p_h[i + 1].coefficients() - p_h[i].coefficients();
    for (int v : interior) row.increment = std::max(row.increment, std::abs(d[v]));
    if (embedded && riesz) {
      row.data_increment = riesz->dual_norm((*embedded)[i + 1] - (*embedded)[i]);
      if (row.data_increment > 0.0) ratio = std::max(ratio, row.increment / row.data_increment);
    }
    rep.max_increment = std::max(rep.max_increment, row.increment);
    rep.rows.push_back(row);
  }
  rep.constant = ratio;
  return rep;
}

}  // namespace

TestBank make_test_bank(const FemSpacePtr& space, TestBankKind kind, int count, std::vector<int> powers) {
  if (count < 1) throw std::invalid_argument("test bank needs at least one field");
  if (powers.empty()) throw std::invalid_argument("test bank needs at least one bump power");
  TestBank bank;
  bank.kind = kind;
  bank.powers = std::move(powers);
  const Box box = bounding_box(space->mesh());
  const double lx = box.x1 - box.x0, ly = box.y1 - box.y0;
  constexpr double pi = std::numbers::pi;
  if (kind == TestBankKind::riesz) {
    const RieszSolver riesz(space, 0);
    for (int k = 0; k < count; ++k) {
      const auto [m, n] = frequencies(k);
      const double phase = 0.3 * k;
      const VectorFunction load = [=](Point2 x) -> std::array<double, 2> {
        const double s = (x.x - box.x0) / lx, r = (x.y - box.y0) / ly;
        return {std::sin(m * pi * s) * std::cos(n * pi * r + phase), std::cos(m * pi * s + phase) * std::sin(n * pi * r)};
      };
      bank.psi.push_back(riesz.represent(load_functional(*space, load)));
    }
  } else {
    for (int k = 0; k < count; ++k) {
      const auto [m, n] = frequencies(k);
      // stream function B(s) S_m(s) B(r) S_n(r), B(t) = t^2 (1 - t)^2, S_k(t) = cos(k pi t)
      const auto factor = [](int freq, double t, double& value, double& deriv) {
        const double B = t * t * (1 - t) * (1 - t);
        const double dB = 2 * t * (1 - t) * (1 - 2 * t);
        const double S = std::cos(freq * pi * t), dS = -freq * pi * std::sin(freq * pi * t);
        value = B * S;
        deriv = dB * S + B * dS;
      };
      const VectorFunction curl = [=](Point2 x) -> std::array<double, 2> {
        double fs, dfs, fr, dfr;
        factor(m - 1, (x.x - box.x0) / lx, fs, dfs);
        factor(n - 1, (x.y - box.y0) / ly, fr, dfr);
        return {fs * dfr / ly, -dfs / lx * fr};
      };
      bank.psi.push_back(interpolate_vector(space->mesh_ptr(), curl, true));
    }
  }
  return bank;
}

TimeSeries<DualFunctional> embedded_velocity(const TimeSeries<VectorField>& u, const SubmeshMap& G) {
  require_mesh(u, G.parent, "embedded_velocity");
  const FemSpace space(G.submesh);
  std::vector<DualFunctional> out;
  out.reserve(u.size());
  for (int i = 0; i < u.size(); ++i) out.push_back(mass_embed(space, restrict_to(G, u[i])));
  return TimeSeries<DualFunctional>(u.a(), u.b(), std::move(out));
}

PressureDecomposition decompose(const TimeSeries<VectorField>& u, const TimeSeries<DualFunctional>& F,
                                const SubmeshMap& G, const Region& U, int delta, const DecomposeOptions& options) {
  require_mesh(u, G.parent, "decompose (u)");
  require_mesh(F, G.submesh, "decompose (F)");
  if (u.size() != F.size() || u.a() != F.a() || u.b() != F.b()) throw FieldError("decompose: u and F use different time grids");
  if (U.size() != G.submesh->num_triangles()) throw FieldError("decompose: U is not a region of the G mesh");
  if (options.sigma != 0 && options.sigma != 1 && options.sigma != -1) throw std::invalid_argument("sigma must be -1, 0 or +1");

  const auto space = std::make_shared<const FemSpace>(G.submesh);
  const GradientProjector projector(space, delta, U);
  const int M = u.size();

  std::vector<DualFunctional> embedded(M, DualFunctional::zero(G.submesh));
  std::vector<ScalarField> ph(M, ScalarField::zero(G.submesh)), pf(M, ScalarField::zero(G.submesh));
  parallel_for(M, options.threads, [&](int i) {
    embedded[i] = mass_embed(*space, restrict_to(G, u[i]));
    ph[i] = -1.0 * projector.associate_pressure(embedded[i]).pressure;
    pf[i] = projector.associate_pressure(F[i]).pressure;
  });

  const TimeSeries<DualFunctional> Mu(u.a(), u.b(), embedded);
  TimeSeries<ScalarField> p_h(u.a(), u.b(), ph);
  TimeSeries<ScalarField> p_f(u.a(), u.b(), pf);

  int sigma = options.sigma;
  double r_minus = std::numeric_limits<double>::quiet_NaN(), r_plus = r_minus;
  WeakIdentityReport weak_minus, weak_plus;
  if (sigma == 0 || options.compute_reports) {
    const TestBank bank = make_test_bank(space, options.bank_kind, options.bank_size);
    const auto P = pair_bank(*space, bank, F, Mu, &p_h, &p_f);
    weak_minus = weak_report(P, bank, -1.0, u.a(), u.b(), u.dt());
    weak_plus = weak_report(P, bank, +1.0, u.a(), u.b(), u.dt());
    r_minus = weak_minus.residual;
    r_plus = weak_plus.residual;
    if (sigma == 0) {
      sigma = r_plus < r_minus ? 1 : -1;
      log()->info("decompose: sigma = {} (residual -1: {:.3e}, +1: {:.3e})", sigma, r_minus, r_plus);
    }
  }

  if (sigma == 1) {
    pf = p_f.values();
  } else {
    for (auto& p : pf) p *= -1.0;
  }
  PressureDecomposition dec{p_h, TimeSeries<ScalarField>(u.a(), u.b(), std::move(pf)), G, U, delta, sigma, r_minus,
                            r_plus, sigma == 1 ? weak_plus : weak_minus, {}, {}};

  if (options.compute_reports) {
    const HarmonicityOperator harm(*space);
    dec.harmonicity.resize(M);
    parallel_for(M, options.threads, [&](int i) { dec.harmonicity[i] = harm(dec.p_h[i]); });
    const RieszSolver riesz(space, delta);
    dec.continuity = continuity_impl(dec.p_h, interior_vertices(*G.submesh), &Mu, &riesz);
  }
  return dec;
}

WeakIdentityReport verify_weak_identity(const PressureDecomposition& dec, const TimeSeries<VectorField>& u,
                                        const TimeSeries<DualFunctional>& F, const TestBank& bank) {
  require_mesh(F, dec.G.submesh, "verify_weak_identity (F)");
  require_same_grid(dec.p_h, dec.p_0, "verify_weak_identity");
  if (u.size() != F.size() || F.size() != dec.p_h.size()) throw FieldError("verify_weak_identity: grid mismatch");
  for (const auto& psi : bank.psi) {
    if (psi.mesh() != dec.G.submesh) throw FieldError("verify_weak_identity: bank is not on the G mesh");
  }
  const FemSpace space(dec.G.submesh);
  const auto Mu = embedded_velocity(u, dec.G);
  const auto P = pair_bank(space, bank, F, Mu, &dec.p_h, &dec.p_0);
  return weak_report(P, bank, 1.0, u.a(), u.b(), u.dt());
}

AnnihilationReport annihilation_gate(const TimeSeries<VectorField>& u, const TimeSeries<DualFunctional>& F,
                                     const SubmeshMap& G, const TestBank& bank, double tolerance, int delta) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("annihilation tolerance must be positive");
  require_mesh(F, G.submesh, "annihilation_gate (F)");
  const auto space = std::make_shared<const FemSpace>(G.submesh);
  const GradientProjector projector(space, delta);
  const RieszSolver riesz(space, delta);
  const auto Mu = embedded_velocity(u, G);
  const int M = u.size();
  std::vector<double> f_norm(M), m_norm(M);
  for (int i = 0; i < M; ++i) {
    f_norm[i] = riesz.dual_norm(F[i]);
    m_norm[i] = riesz.dual_norm(Mu[i]);
  }
  AnnihilationReport rep;
  for (const auto& psi : bank.psi) {
    const VectorField w = psi - projector.project_velocity(psi);
    const double w_norm = std::sqrt(std::max(0.0, energy_product(*space, w, w, delta)));
    std::vector<double> f(M), m(M);
    for (int i = 0; i < M; ++i) {
      f[i] = F[i].pair(w);
      m[i] = Mu[i].pair(w);
    }
    for (int j : bank.powers) {
      const auto eta = [&](double t) { return bump(j, u.a(), u.b(), t); };
      const auto deta = [&](double t) { return bump_derivative(j, u.a(), u.b(), t); };
      const double r = std::abs(integrate_linear_times(f, u.a(), u.b(), eta) - integrate_linear_times(m, u.a(), u.b(), deta));
      std::vector<double> bf(M), bm(M);
      for (int i = 0; i < M; ++i) {
        bf[i] = f_norm[i] * w_norm * std::abs(eta(u.time(i)));
        bm[i] = m_norm[i] * w_norm * std::abs(deta(u.time(i)));
      }
      const double bound = trapezoid(bf, u.dt()) + trapezoid(bm, u.dt());
      rep.residual = std::max(rep.residual, r);
      if (bound > 0.0) rep.relative = std::max(rep.relative, r / bound);
    }
  }
  rep.passed = rep.relative <= tolerance;
  return rep;
}

double harmonicity_residual(const ScalarField& p, const SubmeshMap& G) {
  const FemSpace space(G.submesh);
  const HarmonicityOperator harm(space);
  if (p.mesh() == G.submesh) return harm(p);
  if (p.mesh() == G.parent) return harm(restrict_to(G, p));
  throw FieldError("harmonicity_residual: field is on neither G nor its parent mesh");
}

ContinuityReport continuity_report(const TimeSeries<ScalarField>& p_h, const SubmeshMap& G,
                                   const TimeSeries<DualFunctional>* embedded, int delta) {
  require_mesh(p_h, G.submesh, "continuity_report");
  const auto interior = interior_vertices(*G.submesh);
  if (!embedded) return continuity_impl(p_h, interior, nullptr, nullptr);
  require_mesh(*embedded, G.submesh, "continuity_report (embedded)");
  if (embedded->size() != p_h.size()) throw FieldError("continuity_report: grid mismatch");
  const RieszSolver riesz(std::make_shared<const FemSpace>(G.submesh), delta);
  return continuity_impl(p_h, interior, embedded, &riesz);
}

int nearest_vertex(const TriangleMesh& mesh, Point2 x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Point2 d = mesh.vertices()[i] - x;
    const double dd = dot(d, d);
    if (dd < best_d) {
      best_d = dd;
      best = static_cast<int>(i);
    }
  }
  return best;
}

ReconstructedPotential reconstruct_potential(const MeshPtr& mesh, double a, double b, int M,
                                             const GradientSampler& grad, int base_vertex,
                                             const std::vector<double>& base_values) {
  const int V = static_cast<int>(mesh->num_vertices());
  if (base_vertex < 0 || base_vertex >= V) throw std::invalid_argument("reconstruct_potential: base vertex out of range");
  if (static_cast<int>(base_values.size()) != M) throw std::invalid_argument("reconstruct_potential: need one base value per node");
  const auto& edges = mesh->edges();
  const auto& X = mesh->vertices();
  std::vector<std::vector<int>> incident(V);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e][0]].push_back(static_cast<int>(e));
    incident[edges[e][1]].push_back(static_cast<int>(e));
  }
  // BFS tree: parent edge of each vertex, in visiting order.
  std::vector<int> parent_edge(V, -2), order;
  parent_edge[base_vertex] = -1;
  std::queue<int> queue;
  queue.push(base_vertex);
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    order.push_back(v);
    for (int e : incident[v]) {
      const int w = edges[e][0] == v ? edges[e][1] : edges[e][0];
      if (parent_edge[w] == -2) {
        parent_edge[w] = e;
        queue.push(w);
      }
    }
  }
  if (static_cast<int>(order.size()) != V) throw MeshError("reconstruct_potential: mesh is not connected");

  const auto edge_integral = [&](int node, int e, int from) {
    const int to = edges[e][0] == from ? edges[e][1] : edges[e][0];
    const Point2 x0 = X[from], x1 = X[to], d = x1 - x0, mid = 0.5 * (x0 + x1);
    return (dot(grad(node, e, x0), d) + 4.0 * dot(grad(node, e, mid), d) + dot(grad(node, e, x1), d)) / 6.0;
  };

  ReconstructedPotential out{TimeSeries<ScalarField>(a, b, std::vector<ScalarField>(M, ScalarField::zero(mesh))), 0.0};
  std::vector<ScalarField> values;
  values.reserve(M);
  for (int i = 0; i < M; ++i) {
    Vector p(V);
    p[base_vertex] = base_values[i];
    for (int v : order) {
      if (v == base_vertex) continue;
      const int e = parent_edge[v];
      const int from = edges[e][0] == v ? edges[e][1] : edges[e][0];
      p[v] = p[from] + edge_integral(i, e, from);
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int v0 = edges[e][0], v1 = edges[e][1];
      out.loop_residual = std::max(out.loop_residual, std::abs(p[v1] - p[v0] - edge_integral(i, static_cast<int>(e), v0)));
    }
    values.emplace_back(mesh, std::move(p));
  }
  out.potential = TimeSeries<ScalarField>(a, b, std::move(values));
  return out;
}

GradientSampler p1_gradient_sampler(const TimeSeries<ScalarField>& p) {
  const MeshPtr mesh = p.mesh();
  return [p, mesh](int node, int edge, Point2) {
    return gradient(p[node], static_cast<std::size_t>(mesh->edge_triangles()[edge][0]));
  };
}

std::vector<GradientEstimateRow> gradient_estimate(const PressureDecomposition& dec,
                                                   const TimeSeries<VectorField>& u, double q) {
  require_mesh(u, dec.G.parent, "gradient_estimate");
  std::vector<double> un(u.size());
  double umax = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    un[i] = lq_norm(restrict_to(dec.G, u[i]), q);
    umax = std::max(umax, un[i]);
  }
  std::vector<GradientEstimateRow> rows;
  for (int i = 0; i < u.size(); ++i) {
    if (un[i] <= 1e-12 * umax || un[i] == 0.0) continue;
    rows.push_back({u.time(i), lq_norm_gradient(dec.p_h[i], q) / un[i]});
  }
  return rows;
}

double spacetime_relative_error(const TimeSeries<ScalarField>& p, const std::function<double(Point2, double)>& exact) {
  const ScalarField zero = ScalarField::zero(p.mesh());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double t = p.time(i);
    const double w = (i == 0 || i == p.size() - 1) ? 0.5 : 1.0;
    const ScalarFunction ex = [&](Point2 x) { return exact(x, t); };
    num += w * std::pow(l2_error(p[i], ex, nullptr, true), 2);
    den += w * std::pow(l2_error(zero, ex, nullptr, true), 2);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace presslens
