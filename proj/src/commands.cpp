#include "presslens/commands.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "presslens/corpus.hpp"
#include "presslens/decomposition.hpp"
#include "presslens/io.hpp"
#include "presslens/log.hpp"
#include "presslens/projection.hpp"
#include "presslens/stokes.hpp"
#include "presslens/verify.hpp"

namespace presslens::commands {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

MeshSpec default_mesh(const RunConfig& c) {
  if (c.mesh) return *c.mesh;
  MeshSpec m;
  if (c.corpus == "potential-flow") {
    m.x = m.y = {-1, 1};
  } else if (c.corpus == "taylor-green") {
    m.x = m.y = {0, pi};
  }
  return m;
}

RegionSpec default_window(const RunConfig& c) {
  if (c.G) return *c.G;
  RegionSpec r;
  r.kind = "box";
  if (c.corpus == "potential-flow") {
    r.x = r.y = {-0.5, 0.5};
  } else if (c.corpus == "taylor-green") {
    r.x = r.y = {pi / 4, 3 * pi / 4};
  } else {
    r.x = r.y = {0.25, 0.75};
  }
  return r;
}

TimeGrid time_grid(const RunConfig& c, int level) {
  TimeGrid t;
  if (c.time) {
    t = *c.time;
  } else if (c.corpus == "potential-flow") {
    t = {0.0, 2.0, 17};
  }
  if (c.refine_time) t.M = (t.M - 1) * (1 << level) + 1;
  return t;
}

void require_dynamic(const RunConfig& c) {
  if (c.corpus != "potential-flow" && c.corpus != "taylor-green")
    throw ConfigError(fmt::format("{} needs corpus potential-flow or taylor-green, got {}", c.command, c.corpus));
}

std::function<double(Point2, double)> exact_total(const RunConfig& c) {
  if (c.corpus == "potential-flow") return corpus::PotentialFlow::total_pressure;
  const corpus::TaylorGreen tg(c.viscosity);
  return [tg](Point2 x, double t) { return tg.pressure(x, t); };
}

json rates_of(const std::vector<double>& e) {
  json r = json::array();
  for (std::size_t k = 0; k + 1 < e.size(); ++k) r.push_back(std::log(e[k] / e[k + 1]) / std::log(2.0));
  return r;
}

json mesh_info(const TriangleMesh& m) {
  return {{"vertices", m.num_vertices()}, {"triangles", m.num_triangles()}, {"edges", m.num_edges()},
          {"h", m.mesh_size()}, {"checksum", checksum_hex(m.checksum())}};
}

fs::path level_dir(const RunConfig& c, int level) { return c.output / fmt::format("level_{}", level); }

DecomposeOptions decompose_options(const RunConfig& c) {
  DecomposeOptions o;
  o.threads = c.threads;
  o.bank_kind = test_bank_kind_from_string(c.test_bank);
  o.bank_size = c.bank_size;
  return o;
}

json weak_identity_json(const WeakIdentityReport& w) {
  return {{"residual", w.residual}, {"relative", w.relative}, {"dt", w.dt}, {"constant", w.constant}};
}

json decomposition_json(const PressureDecomposition& d) {
  json cont = json::array();
  for (const auto& r : d.continuity.rows)
    cont.push_back({{"t0", r.t0}, {"t1", r.t1}, {"increment", r.increment}, {"data_increment", r.data_increment}});
  return {{"sigma", d.sigma},
          {"residual_minus", d.residual_minus},
          {"residual_plus", d.residual_plus},
          {"weak_identity", weak_identity_json(d.weak_identity)},
          {"harmonicity", d.harmonicity},
          {"continuity", {{"rows", cont}, {"max_increment", d.continuity.max_increment}, {"constant", d.continuity.constant}}}};
}

json gradient_estimates_json(const RunConfig& c, const PressureDecomposition& d, const TimeSeries<VectorField>& u) {
  json out = json::array();
  for (double q : c.q) {
    json rows = json::array();
    for (const auto& r : gradient_estimate(d, u, q)) rows.push_back({{"t", r.t}, {"ratio", r.ratio}});
    out.push_back({{"q", q}, {"rows", rows}});
  }
  return out;
}

void write_problem_meshes(const fs::path& dir, const GnsProblem& prob) {
  io::write_mesh(dir / "mesh.json", *prob.G.parent);
  io::write_mesh(dir / "submesh.json", *prob.G.submesh);
}

TimeSeries<DualFunctional> assemble_F(const GnsProblem& prob) {
  std::vector<DualFunctional> F;
  for (int i = 0; i < prob.u.size(); ++i) F.push_back(assemble_gns_functional(prob, i).total);
  return TimeSeries<DualFunctional>(prob.u.a(), prob.u.b(), std::move(F));
}

// Source functional for cmd_project and its pointwise description.
DualFunctional project_source(const RunConfig& c, const FemSpace& space) {
  if (c.corpus == "bubble") return load_functional(space, corpus::BubbleStokes::forcing);
  if (c.corpus == "potential-flow") return load_functional(space, corpus::PotentialFlow::grad_phi);
  const corpus::TaylorGreen tg(c.viscosity);
  return load_functional(space, [tg](Point2 x) { return tg.velocity(x, 0.0); });
}

std::string sampled_csv(const ScalarField& p) {
  std::ostringstream out;
  out << "x,y,p\n";
  const auto& v = p.mesh()->vertices();
  for (std::size_t i = 0; i < v.size(); ++i)
    out << io::format_double(v[i].x) << ',' << io::format_double(v[i].y) << ',' << io::format_double(p.coefficients()[i]) << '\n';
  return out.str();
}

void finish(const RunConfig& c, CommandResult& r, const char* file = "report.json") {
  io::write_text(c.output / file, r.report.dump(1) + "\n");
}

}  // namespace

GnsProblem build_problem(const RunConfig& c, int level) {
  require_dynamic(c);
  auto mesh = build_mesh(default_mesh(c), level);
  auto G = extract_submesh(mesh, region_predicate(default_window(c)));
  const Region U = c.U.kind == "all" ? Region::whole(*G.submesh) : Region::from_predicate(*G.submesh, region_predicate(c.U));
  if (U.count() == 0) throw ConfigError("region U selects no triangle of G");
  const auto t = time_grid(c, level);
  std::function<std::array<double, 2>(Point2, double)> velocity = corpus::PotentialFlow::velocity;
  if (c.corpus == "taylor-green") {
    const corpus::TaylorGreen tg(c.viscosity);
    velocity = [tg](Point2 x, double s) { return tg.velocity(x, s); };
  }
  auto u = make_series<VectorField>(t.a, t.b, t.M, [&](double s) {
    return interpolate_vector(mesh, [&](Point2 x) { return velocity(x, s); });
  });
  return GnsProblem{std::move(u), c.viscosity, std::nullopt, {}, std::move(G), U, c.delta};
}

CommandResult cmd_mesh(const RunConfig& c) {
  CommandResult r;
  const auto spec = default_mesh(c);
  json levels = json::array();
  for (int k = 0; k < c.levels; ++k) {
    const auto mesh = build_mesh(spec, k);
    const std::string file = fmt::format("mesh_level_{}.json", k);
    io::write_mesh(c.output / file, *mesh);
    json info = mesh_info(*mesh);
    info["level"] = k;
    info["file"] = file;
    info["violations"] = mesh->validate();
    levels.push_back(info);
  }
  r.report = {{"command", "mesh"}, {"levels", levels}};
  finish(c, r);
  return r;
}

CommandResult cmd_solve(const RunConfig& c) {
  if (c.corpus != "bubble") throw ConfigError("solve needs corpus bubble (the steady manufactured case), got " + c.corpus);
  using corpus::BubbleStokes;
  CommandResult r;
  const auto spec = default_mesh(c);
  json levels = json::array();
  std::vector<double> eu, ep;
  for (int k = 0; k < c.levels; ++k) {
    const auto mesh = build_mesh(spec, k);
    FemSpace space(mesh);
    const auto s = solve_stokes(mesh, load_functional(space, BubbleStokes::forcing), c.delta);
    const auto dir = level_dir(c, k);
    io::write_mesh(dir / "mesh.json", *mesh);
    io::write_field(dir / "velocity.json", s.velocity);
    io::write_field(dir / "pressure.json", s.pressure);
    eu.push_back(l2_error(s.velocity, BubbleStokes::velocity));
    ep.push_back(l2_error(s.pressure, BubbleStokes::pressure, nullptr, true));
    json info = mesh_info(*mesh);
    info.update({{"level", k},
                 {"residual_momentum", s.residual_momentum},
                 {"residual_mass", s.residual_mass},
                 {"estimate_ratio", s.estimate_ratio},
                 {"refinement_steps", s.refinement_steps},
                 {"velocity_l2_error", eu.back()},
                 {"pressure_l2_error", ep.back()}});
    levels.push_back(info);
  }
  r.report = {{"command", "solve"}, {"delta", c.delta}, {"levels", levels}, {"velocity_rates", rates_of(eu)}, {"pressure_rates", rates_of(ep)}};
  finish(c, r);
  return r;
}

CommandResult cmd_project(const RunConfig& c) {
  CommandResult r;
  const auto spec = default_mesh(c);
  json levels = json::array();
  for (int k = 0; k < c.levels; ++k) {
    const auto mesh = build_mesh(spec, k);
    auto space = std::make_shared<const FemSpace>(mesh);
    const Region U = c.U.kind == "all" ? Region::whole(*mesh) : Region::from_predicate(*mesh, region_predicate(c.U));
    if (U.count() == 0) throw ConfigError("region U selects no triangle of the mesh");
    const Region G = Region::from_predicate(*mesh, region_predicate(default_window(c)));
    GradientProjector P(space, c.delta, U);
    RieszSolver riesz(space, c.delta);
    const auto f = project_source(c, *space);
    const auto ap = P.associate_pressure(f);
    const auto ef = P.project_functional(f);
    const auto ev = P.project_velocity(riesz.represent(f));

    const auto dir = level_dir(c, k);
    io::write_mesh(dir / "mesh.json", *mesh);
    io::write_field(dir / "source.json", f);
    io::write_field(dir / "projected_functional.json", ef);
    io::write_field(dir / "projected_velocity.json", ev);
    io::write_field(dir / "pressure.json", ap.pressure);
    io::write_text(dir / "pressure.csv", sampled_csv(ap.pressure));

    const double dual = riesz.dual_norm(f);
    json poincare = json::array();
    const std::vector<ScalarField> samples = {ap.pressure, interpolate_scalar(mesh, [](Point2 p) { return p.x; }),
                                              interpolate_scalar(mesh, [](Point2 p) { return std::cos(2 * p.x) * p.y; })};
    for (double q : c.q) {
      const auto wp = weak_poincare_ratio(mesh, U, samples, q);
      poincare.push_back({{"q", q}, {"ratio", wp.ratio}, {"used", wp.used}, {"skipped", wp.skipped}});
    }
    json info = mesh_info(*mesh);
    info.update({{"level", k},
                 {"dual_norm", dual},
                 {"pressure_norm_G", G.count() ? lq_norm(ap.pressure, 2.0, &G) : 0.0},
                 {"pressure_bound_ratio", G.count() && dual > 0 ? lq_norm(ap.pressure, 2.0, &G) / dual : 0.0},
                 {"associate_residual", ap.residual},
                 {"weak_poincare", poincare}});
    if (spec.kind == "disk") {
      json table = json::array();
      const auto gen = [&](const FemSpace& s) { return project_source(c, s); };
      for (const auto& row : check_scaling_invariance({0.5, 1.0, 2.0, 4.0}, gen, spec.level + k, c.delta))
        table.push_back({{"R", row.R}, {"ratio", row.ratio}, {"dual_norm", row.dual_norm}, {"pressure_norm", row.pressure_norm}});
      info["scaling"] = table;
    }
    levels.push_back(info);
  }
  r.report = {{"command", "project"}, {"corpus", c.corpus}, {"delta", c.delta}, {"levels", levels}};
  finish(c, r);
  return r;
}

CommandResult cmd_decompose(const RunConfig& c) {
  require_dynamic(c);
  CommandResult r;
  json levels = json::array();
  std::vector<double> eh, e0, et;
  for (int k = 0; k < c.levels; ++k) {
    const auto prob = build_problem(c, k);
    const auto F = assemble_F(prob);
    const auto bank = make_test_bank(std::make_shared<const FemSpace>(prob.G.submesh), test_bank_kind_from_string(c.test_bank), c.bank_size);
    const auto gate = annihilation_gate(prob.u, F, prob.G, bank, c.tolerances.gate, c.delta);
    if (!gate.passed) throw FieldError(fmt::format("annihilation gate failed on level {}: relative {}", k, gate.relative));
    const auto dec = decompose(prob.u, F, prob.G, prob.U, c.delta, decompose_options(c));
    const auto dir = level_dir(c, k);
    write_problem_meshes(dir, prob);
    io::write_series(dir / "p_h", dec.p_h);
    io::write_series(dir / "p_0", dec.p_0);
    json info = decomposition_json(dec);
    info["level"] = k;
    info["mesh"] = mesh_info(*prob.G.parent);
    info["M"] = prob.u.size();
    info["gate"] = {{"residual", gate.residual}, {"relative", gate.relative}, {"passed", gate.passed}};
    info["gradient_estimates"] = gradient_estimates_json(c, dec, prob.u);
    if (c.corpus == "potential-flow") {
      eh.push_back(spacetime_relative_error(dec.p_h, corpus::PotentialFlow::harmonic_pressure));
      e0.push_back(spacetime_relative_error(dec.p_0, corpus::PotentialFlow::forcing_pressure));
      info["p_h_error"] = eh.back();
      info["p_0_error"] = e0.back();
    }
    et.push_back(spacetime_relative_error(total_pressure(dec), exact_total(c)));
    info["total_pressure_error"] = et.back();
    levels.push_back(info);
  }
  r.report = {{"command", "decompose"}, {"corpus", c.corpus}, {"levels", levels}, {"total_pressure_rates", rates_of(et)}};
  if (!eh.empty()) {
    r.report["p_h_rates"] = rates_of(eh);
    r.report["p_0_rates"] = rates_of(e0);
  }
  finish(c, r);
  return r;
}

CommandResult cmd_gns(const RunConfig& c) {
  require_dynamic(c);
  CommandResult r;
  json levels = json::array();
  std::vector<double> et;
  bool split_ok = true;
  for (int k = 0; k < c.levels; ++k) {
    const auto prob = build_problem(c, k);
    GnsOptions opt;
    opt.decompose = decompose_options(c);
    opt.gate_tolerance = c.tolerances.gate;
    const auto gd = gns_decompose(prob, opt);
    const auto bank = make_test_bank(std::make_shared<const FemSpace>(prob.G.submesh), test_bank_kind_from_string(c.test_bank), c.bank_size);
    const auto momentum = verify_momentum_identity(gd, prob, bank);
    const auto total = total_pressure(gd.dec);
    const auto dir = level_dir(c, k);
    write_problem_meshes(dir, prob);
    io::write_series(dir / "p_h", gd.dec.p_h);
    io::write_series(dir / "p_0", gd.dec.p_0);
    const char* part_names[] = {"p_0_viscous", "p_0_convective", "p_0_forcing"};
    for (int i = 0; i < 3; ++i) io::write_series(dir / part_names[i], gd.parts[i]);
    io::write_series(dir / "total_pressure", total);

    json split = json::array();
    for (const auto& s : split_estimates(gd)) split.push_back({{"part", s.part}, {"t", s.t}, {"ratio", s.ratio}});
    const bool ok = gd.split_residual <= c.tolerances.split * gd.split_scale;
    split_ok = split_ok && ok;
    et.push_back(spacetime_relative_error(total, exact_total(c)));
    json info = decomposition_json(gd.dec);
    info.update({{"level", k},
                 {"mesh", mesh_info(*prob.G.parent)},
                 {"M", prob.u.size()},
                 {"gate", {{"residual", gd.gate.residual}, {"relative", gd.gate.relative}, {"passed", gd.gate.passed}}},
                 {"momentum_identity", {{"residual", momentum.residual}, {"relative", momentum.relative}}},
                 {"split", {{"residual", gd.split_residual}, {"scale", gd.split_scale}, {"within_tolerance", ok}}},
                 {"split_estimates", split},
                 {"gradient_estimates", gradient_estimates_json(c, gd.dec, prob.u)},
                 {"total_pressure_error", et.back()}});
    levels.push_back(info);
  }
  r.report = {{"command", "gns"}, {"corpus", c.corpus}, {"levels", levels}, {"total_pressure_rates", rates_of(et)}, {"split_ok", split_ok}};
  finish(c, r);
  return r;
}

CommandResult cmd_verify(const RunConfig& c) {
  CommandResult r;
  const auto names = c.checks.empty() ? verify::check_names() : c.checks;
  r.report = verify::summary_json(verify::run_checks(names, c.threads));
  r.report["command"] = "verify";
  r.exit_code = r.report["passed"].get<bool>() ? exit_code::ok : exit_code::verify_failed;
  finish(c, r, "verify.json");
  return r;
}

CommandResult cmd_export_vtk(const RunConfig& c) {
  if (c.mesh_file.empty() || c.input.empty()) throw ConfigError("export-vtk needs mesh_file and input");
  CommandResult r;
  const auto mesh = io::read_mesh(c.mesh_file);
  const std::string kind = io::field_kind(c.input);
  json files = json::array();
  const std::string stem = c.input.filename().replace_extension().string();
  if (kind == "dual") throw ConfigError("dual functionals have no point values to export");
  if (fs::is_directory(c.input)) {
    auto write_all = [&](const auto& series) {
      for (int i = 0; i < series.size(); ++i) {
        const std::string name = fmt::format("{}_{:04d}.vtk", stem, i);
        io::write_vtk(c.output / name, series[i], stem);
        files.push_back({{"file", name}, {"t", series.time(i)}});
      }
    };
    if (kind == "scalar") write_all(io::read_series<ScalarField>(c.input, mesh));
    else if (kind == "vector") write_all(io::read_series<VectorField>(c.input, mesh));
    else throw io::IoError("unknown series kind '" + kind + "'");
  } else {
    const std::string name = stem + ".vtk";
    if (kind == "scalar") io::write_vtk(c.output / name, io::read_scalar_field(c.input, mesh), stem);
    else if (kind == "vector") io::write_vtk(c.output / name, io::read_vector_field(c.input, mesh), stem);
    else throw io::IoError("unknown field kind '" + kind + "'");
    files.push_back({{"file", name}});
  }
  r.report = {{"command", "export-vtk"}, {"kind", kind}, {"files", files}};
  finish(c, r);
  return r;
}

CommandResult run(const RunConfig& c) {
  if (c.command == "mesh") return cmd_mesh(c);
  if (c.command == "solve") return cmd_solve(c);
  if (c.command == "project") return cmd_project(c);
  if (c.command == "decompose") return cmd_decompose(c);
  if (c.command == "gns") return cmd_gns(c);
  if (c.command == "verify") return cmd_verify(c);
  if (c.command == "export-vtk") return cmd_export_vtk(c);
  throw ConfigError("unknown command '" + c.command + "'");
}

ErrorReport describe_current_exception() {
  auto make = [](int code, const char* type, const std::string& message) {
    return ErrorReport{code, json{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}}};
  };
  try {
    throw;
  } catch (const ConfigError& e) {
    return make(exit_code::config, "config", e.what());
  } catch (const io::ChecksumError& e) {
    return make(exit_code::checksum, "checksum", e.what());
  } catch (const io::IoError& e) {
    return make(exit_code::io, "io", e.what());
  } catch (const fs::filesystem_error& e) {
    return make(exit_code::io, "io", e.what());
  } catch (const SolverError& e) {
    return make(exit_code::solver, "solver", e.what());
  } catch (const std::exception& e) {
    return make(exit_code::invalid_input, "invalid_input", e.what());
  } catch (...) {
    return make(exit_code::invalid_input, "invalid_input", "unknown error");
  }
}

}  // namespace presslens::commands
