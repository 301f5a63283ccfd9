#include "presslens/gns.hpp"

#include <algorithm>
#include <cmath>

#include "presslens/log.hpp"
#include "presslens/parallel.hpp"
#include "presslens/quadrature.hpp"

namespace presslens {

namespace {

constexpr std::array<std::array<double, 3>, 3> kVertexLambda{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

Tensor2 symmetric_part(const Tensor2& g) {
  return {{{g[0][0], 0.5 * (g[0][1] + g[1][0])}, {0.5 * (g[0][1] + g[1][0]), g[1][1]}}};
}

// Problem data restricted to G at one time node.
struct NodeData {
  VectorField u;
  std::optional<ScalarField> a;
  std::vector<ScalarField> f;
  double a_const;
};

NodeData node_data(const GnsProblem& prob, int i) {
  NodeData d{restrict_to(prob.G, prob.u[i]), std::nullopt, {}, prob.viscosity};
  if (prob.viscosity_field) d.a = restrict_to(prob.G, (*prob.viscosity_field)[i]);
  for (const auto& fs : prob.forcing) d.f.push_back(restrict_to(prob.G, fs[i]));
  return d;
}

// Stress addends at one quadrature point: viscous, convective, forcing.
std::array<Tensor2, 3> stresses(const NodeData& d, std::size_t t, const std::array<double, 3>& lambda) {
  const auto g = gradient(d.u, t, lambda);
  const auto u = evaluate(d.u, t, lambda);
  const double a = d.a ? evaluate(*d.a, t, lambda) : d.a_const;
  std::array<Tensor2, 3> out{};
  const Tensor2 D = symmetric_part(g);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out[0][i][j] = a * D[i][j];
      out[1][i][j] = -u[i] * u[j];
      out[2][i][j] = d.f.empty() ? 0.0 : evaluate(d.f[2 * i + j], t, lambda);
    }
  }
  return out;
}

}  // namespace

void validate(const GnsProblem& prob) {
  if (prob.u.mesh() != prob.G.parent) throw FieldError("gns: u is not on the parent mesh of G");
  if (prob.U.size() != prob.G.submesh->num_triangles()) throw FieldError("gns: U is not a region of the G mesh");
  if (prob.viscosity_field) {
    const auto& a = *prob.viscosity_field;
    if (a.mesh() != prob.G.parent || !(a.size() == prob.u.size() && a.a() == prob.u.a() && a.b() == prob.u.b()))
      throw FieldError("gns: viscosity series does not match u");
    for (const auto& v : a.values()) {
      if (!(v.coefficients().minCoeff() > 0.0)) throw FieldError("gns: viscosity must be positive");
    }
  } else if (!(prob.viscosity > 0.0) || !std::isfinite(prob.viscosity)) {
    throw FieldError("gns: viscosity must be positive");
  }
  if (!prob.forcing.empty()) {
    if (prob.forcing.size() != 4) throw FieldError("gns: forcing needs four tensor components");
    for (const auto& f : prob.forcing) {
      if (f.mesh() != prob.G.parent || f.size() != prob.u.size() || f.a() != prob.u.a() || f.b() != prob.u.b())
        throw FieldError("gns: forcing series does not match u");
    }
  }
}

std::vector<std::array<Tensor2, 3>> symmetric_gradient(const VectorField& u) {
  const auto& mesh = *u.mesh();
  std::vector<std::array<Tensor2, 3>> out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) out[t][k] = symmetric_part(gradient(u, t, kVertexLambda[k]));
  }
  return out;
}

GnsFunctional assemble_gns_functional(const GnsProblem& prob, int node, ViscousForm form) {
  validate(prob);
  if (node < 0 || node >= prob.u.size()) throw std::out_of_range("assemble_gns_functional: node out of range");
  const NodeData d = node_data(prob, node);
  const FemSpace space(prob.G.submesh);
  const auto& mesh = space.mesh();
  const auto& rule = triangle_rule_degree5();
  const int n = space.num_p2_nodes();
  std::array<Vector, 3> load;
  for (auto& l : load) l = Vector::Zero(2 * n);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto nodes = space.p2_nodes(t);
    const auto& geo = space.geometry(t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto dphi = p2_basis_gradients(rule.points[q], geo);
      const auto T = stresses(d, t, rule.points[q]);
      const double w = rule.weights[q] * geo.area;
      for (int a = 0; a < 6; ++a) {
        const double g[2] = {dphi[a].x, dphi[a].y};
        for (int c = 0; c < 2; ++c) {
          for (int part = 0; part < 3; ++part) {
            double s = 0.0;
            if (part == 0 && form == ViscousForm::symmetric) {
              // T : D(v) for v = phi_a e_c, D(v)_{ij} = (delta_ic g_j + delta_jc g_i) / 2
              for (int j = 0; j < 2; ++j) s += 0.5 * (T[0][c][j] + T[0][j][c]) * g[j];
            } else {
              s = T[part][c][0] * g[0] + T[part][c][1] * g[1];
            }
            load[part][c * n + nodes[a]] += w * s;
          }
        }
      }
    }
  }
  GnsFunctional out{DualFunctional(space.mesh_ptr(), load[0] + load[1] + load[2], Provenance::tensor_divergence),
                    {DualFunctional(space.mesh_ptr(), load[0], Provenance::tensor_divergence),
                     DualFunctional(space.mesh_ptr(), load[1], Provenance::tensor_divergence),
                     DualFunctional(space.mesh_ptr(), load[2], Provenance::tensor_divergence)}};
  return out;
}

GnsDecomposition gns_decompose(const GnsProblem& prob, const GnsOptions& options) {
  validate(prob);
  const int M = prob.u.size();
  const MeshPtr gmesh = prob.G.submesh;
  std::vector<DualFunctional> F(M, DualFunctional::zero(gmesh));
  std::vector<std::array<DualFunctional, 3>> parts(
      M, {DualFunctional::zero(gmesh), DualFunctional::zero(gmesh), DualFunctional::zero(gmesh)});
  parallel_for(M, options.decompose.threads, [&](int i) {
    auto g = assemble_gns_functional(prob, i, options.viscous_form);
    F[i] = std::move(g.total);
    parts[i] = std::move(g.parts);
  });
  TimeSeries<DualFunctional> Fs(prob.u.a(), prob.u.b(), F);

  AnnihilationReport gate;
  const auto space = std::make_shared<const FemSpace>(gmesh);
  if (options.gate_tolerance > 0.0) {
    const TestBank bank = make_test_bank(space, options.decompose.bank_kind, options.decompose.bank_size);
    gate = annihilation_gate(prob.u, Fs, prob.G, bank, options.gate_tolerance, prob.delta);
    log()->info("gns: annihilation gate relative residual {:.3e}", gate.relative);
    if (!gate.passed)
      throw FieldError(fmt::format("gns: annihilation gate failed (relative residual {:.3e} > {:.3e})", gate.relative,
                                   options.gate_tolerance));
  } else {
    gate.passed = true;
  }

  PressureDecomposition dec = decompose(prob.u, Fs, prob.G, prob.U, prob.delta, options.decompose);
  const GradientProjector projector(space, prob.delta, prob.U);
  std::vector<std::vector<ScalarField>> p(3, std::vector<ScalarField>(M, ScalarField::zero(gmesh)));
  parallel_for(M, options.decompose.threads, [&](int i) {
    for (int k = 0; k < 3; ++k) p[k][i] = static_cast<double>(dec.sigma) * projector.associate_pressure(parts[i][k]).pressure;
  });
  GnsDecomposition out{std::move(dec), {}, std::move(Fs), std::move(parts), gate, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) out.parts.emplace_back(prob.u.a(), prob.u.b(), std::move(p[k]));
  for (int i = 0; i < M; ++i) {
    const Vector sum = out.parts[0][i].coefficients() + out.parts[1][i].coefficients() + out.parts[2][i].coefficients();
    const Vector& mono = out.dec.p_0[i].coefficients();
    out.split_residual = std::max(out.split_residual, (sum - mono).lpNorm<Eigen::Infinity>());
    out.split_scale = std::max(out.split_scale, mono.lpNorm<Eigen::Infinity>());
  }
  return out;
}

MomentumReport verify_momentum_identity(const GnsDecomposition& gd, const GnsProblem& prob, const TestBank& bank) {
  validate(prob);
  const auto& dec = gd.dec;
  const int M = prob.u.size();
  if (dec.p_h.size() != M) throw FieldError("verify_momentum_identity: grid mismatch");
  const FemSpace space(prob.G.submesh);
  const auto& mesh = space.mesh();
  const auto& rule = triangle_rule_degree5();
  const double a = prob.u.a(), b = prob.u.b(), dt = prob.u.dt();

  // Per node and bank field, the separate space integrals
  //   int u . psi, int grad p_h . psi, int (u x u) : grad psi, -int a D(u) : grad psi,
  //   -int f : grad psi, int p_0 div psi.
  constexpr int kTerms = 6;
  const int K = static_cast<int>(bank.psi.size());
  std::vector<std::vector<std::array<double, kTerms>>> S(K, std::vector<std::array<double, kTerms>>(M));
  for (int i = 0; i < M; ++i) {
    const NodeData d = node_data(prob, i);
    for (int k = 0; k < K; ++k) {
      const auto& psi = bank.psi[k];
      if (psi.mesh() != prob.G.submesh) throw FieldError("verify_momentum_identity: bank is not on the G mesh");
      std::array<double, kTerms> s{};
      for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double area = space.geometry(t).area;
        const Point2 gph = gradient(dec.p_h[i], t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const auto& lam = rule.points[q];
          const double w = rule.weights[q] * area;
          const auto u = evaluate(d.u, t, lam);
          const auto v = evaluate(psi, t, lam);
          const auto gv = gradient(psi, t, lam);
          const auto T = stresses(d, t, lam);
          s[0] += w * (u[0] * v[0] + u[1] * v[1]);
          s[1] += w * (gph.x * v[0] + gph.y * v[1]);
          for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
              s[2] -= w * T[1][r][c] * gv[r][c];
              s[3] -= w * T[0][r][c] * gv[r][c];
              s[4] -= w * T[2][r][c] * gv[r][c];
            }
          }
          s[5] += w * evaluate(dec.p_0[i], t, lam) * (gv[0][0] + gv[1][1]);
        }
      }
      S[k][i] = s;
    }
  }
  MomentumReport rep;
  double mag = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int j : bank.powers) {
      std::array<double, kTerms> total{};
      for (int i = 0; i < M; ++i) {
        const double w = (i == 0 || i == M - 1) ? 0.5 * dt : dt;
        const double t = prob.u.time(i);
        for (int m = 0; m < kTerms; ++m) total[m] += w * S[k][i][m] * (m < 2 ? bump_derivative(j, a, b, t) : bump(j, a, b, t));
      }
      double sum = 0.0;
      for (double x : total) {
        sum += x;
        mag = std::max(mag, std::abs(x));
      }
      rep.residual = std::max(rep.residual, std::abs(sum));
    }
  }
  rep.relative = mag > 0.0 ? rep.residual / mag : 0.0;
  return rep;
}

std::vector<SplitEstimateRow> split_estimates(const GnsDecomposition& gd) {
  const auto space = std::make_shared<const FemSpace>(gd.dec.G.submesh);
  const RieszSolver riesz(space, gd.dec.delta);
  std::vector<SplitEstimateRow> rows;
  for (int i = 0; i < gd.F.size(); ++i) {
    const double total = riesz.dual_norm(gd.F[i]);
    for (int k = 0; k < 3; ++k) {
      const double part = riesz.dual_norm(gd.F_parts[i][k]);
      if (part <= 1e-10 * total || part == 0.0) continue;
      rows.push_back({k + 1, gd.F.time(i), lq_norm(gd.parts[k][i], 2.0) / part});
    }
  }
  return rows;
}

TimeSeries<ScalarField> total_pressure(const PressureDecomposition& dec) {
  const auto dph = time_derivative(dec.p_h);
  std::vector<ScalarField> out;
  out.reserve(dec.p_h.size());
  for (int i = 0; i < dec.p_h.size(); ++i) out.push_back(dph[i] + dec.p_0[i]);
  return TimeSeries<ScalarField>(dec.p_h.a(), dec.p_h.b(), std::move(out));
}

}  // namespace presslens
