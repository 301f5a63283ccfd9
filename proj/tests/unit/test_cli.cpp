#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "presslens/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "presslens_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  std::ofstream(dir / "config.json") << text;
  return dir / "config.json";
}

Run run_cli(const std::string& args, const fs::path& dir) {
  const auto capture = dir / "stdout.txt";
  const std::string command = std::string(PRESSLENS_BIN) + " " + args + " > " + capture.string() + " 2>/dev/null";
  const int status = std::system(command.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = presslens::io::read_text(capture);
  return r;
}

json error_of(const Run& r) { return json::parse(r.out).at("error"); }

}  // namespace

TEST_CASE("mesh with n = 0 is a config error") {
  const auto dir = scratch("n0");
  const auto cfg = write_config(dir, R"({"mesh": {"kind": "rect", "n": 0}, "output": "out"})");
  const auto r = run_cli("mesh --config " + cfg.string(), dir);
  CHECK(r.code == 2);
  CHECK(error_of(r)["type"] == "config");
  CHECK(error_of(r)["exit_code"] == 2);
}

TEST_CASE("mesh writes readable files") {
  const auto dir = scratch("mesh");
  const auto cfg = write_config(dir, R"({"mesh": {"kind": "disk", "level": 1}, "levels": 2, "output": "out"})");
  const auto r = run_cli("mesh --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  const auto report = json::parse(presslens::io::read_text(dir / "out/report.json"));
  REQUIRE(report["levels"].size() == 2);
  const auto mesh = presslens::io::read_mesh(dir / "out/mesh_level_1.json");
  CHECK(presslens::checksum_hex(mesh->checksum()) == report["levels"][1]["checksum"]);
}

TEST_CASE("distinct exit codes") {
  const auto dir = scratch("codes");
  SUBCASE("malformed config") {
    std::ofstream(dir / "broken.json") << "{\"levels\": [";
    const auto r = run_cli("mesh --config " + (dir / "broken.json").string(), dir);
    CHECK(r.code == 2);
    CHECK(error_of(r)["type"] == "config");
  }
  SUBCASE("usage error") {
    CHECK(run_cli("", dir).code == 2);
    CHECK(run_cli("mesh", dir).code == 2);
  }
  SUBCASE("command mismatch") {
    const auto cfg = write_config(dir, R"({"command": "gns"})");
    CHECK(run_cli("mesh --config " + cfg.string(), dir).code == 2);
  }
  SUBCASE("solve on a corpus without a steady case") {
    const auto cfg = write_config(dir, R"({"corpus": {"case": "taylor-green"}, "output": "out"})");
    CHECK(run_cli("solve --config " + cfg.string(), dir).code == 2);
  }
  SUBCASE("solver failure") {
    const auto cfg = write_config(dir, R"({"mesh": {"n": 1}, "corpus": {"case": "bubble"}, "output": "out"})");
    const auto r = run_cli("solve --config " + cfg.string(), dir);
    CHECK(r.code == 5);
    CHECK(error_of(r)["type"] == "solver");
  }
  SUBCASE("missing input file") {
    const auto mcfg = write_config(dir, R"({"mesh": {"n": 2}, "output": "m"})");
    REQUIRE(run_cli("mesh --config " + mcfg.string(), dir).code == 0);
    const auto cfg = write_config(dir, R"({"mesh_file": "m/mesh_level_0.json", "input": "nothing.json", "output": "v"})");
    const auto r = run_cli("export-vtk --config " + cfg.string(), dir);
    CHECK(r.code == 3);
    CHECK(error_of(r)["type"] == "io");
  }
  SUBCASE("checksum mismatch") {
    const auto mcfg = write_config(dir, R"({"mesh": {"n": 2}, "levels": 2, "output": "m"})");
    REQUIRE(run_cli("mesh --config " + mcfg.string(), dir).code == 0);
    const auto mesh = presslens::io::read_mesh(dir / "m/mesh_level_1.json");
    presslens::io::write_field(dir / "p.json", presslens::ScalarField::zero(mesh));
    const auto cfg = write_config(dir, R"({"mesh_file": "m/mesh_level_0.json", "input": "p.json", "output": "v"})");
    const auto r = run_cli("export-vtk --config " + cfg.string(), dir);
    CHECK(r.code == 4);
    CHECK(error_of(r)["type"] == "checksum");
  }
}

TEST_CASE("decompose is deterministic and thread count does not change verdicts") {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, R"({"corpus": {"case": "potential-flow"}, "mesh": {"kind": "rect", "x": [-1, 1], "y": [-1, 1], "n": 8},
                                        "time": {"a": 0, "b": 2, "M": 9}, "q": [2, 4], "output": "run"})");
  REQUIRE(run_cli("decompose --config " + cfg.string() + " --out " + (dir / "a").string(), dir).code == 0);
  REQUIRE(run_cli("decompose --config " + cfg.string() + " --out " + (dir / "b").string(), dir).code == 0);
  REQUIRE(run_cli("decompose --config " + cfg.string() + " --out " + (dir / "c").string() + " --threads 3", dir).code == 0);
  const auto a = presslens::io::read_text(dir / "a/report.json");
  CHECK(a == presslens::io::read_text(dir / "b/report.json"));
  CHECK(presslens::io::read_text(dir / "a/level_0/p_h/node_0004.json") == presslens::io::read_text(dir / "b/level_0/p_h/node_0004.json"));

  const auto ja = json::parse(a), jc = json::parse(presslens::io::read_text(dir / "c/report.json"));
  const auto& la = ja["levels"][0];
  const auto& lc = jc["levels"][0];
  CHECK(la["sigma"] == lc["sigma"]);
  CHECK(la["gate"]["passed"] == lc["gate"]["passed"]);
  CHECK(lc["p_h_error"].get<double>() == doctest::Approx(la["p_h_error"].get<double>()).epsilon(1e-10));
  CHECK(lc["weak_identity"]["residual"].get<double>() == doctest::Approx(la["weak_identity"]["residual"].get<double>()).epsilon(1e-8));

  // the written series can be exported
  const auto vcfg = write_config(dir, R"({"mesh_file": "a/level_0/submesh.json", "input": "a/level_0/p_0", "output": "vtk"})");
  REQUIRE(run_cli("export-vtk --config " + vcfg.string(), dir).code == 0);
  CHECK(fs::exists(dir / "vtk/p_0_0008.vtk"));
  const auto dcfg = write_config(dir, R"({"mesh_file": "a/level_0/mesh.json", "input": "a/level_0/p_h", "output": "vtk2"})");
  CHECK(run_cli("export-vtk --config " + dcfg.string(), dir).code == 4);
}

TEST_CASE("gns writes the split and momentum reports") {
  const auto dir = scratch("gns");
  const auto cfg = write_config(dir, R"({"corpus": {"case": "taylor-green"}, "mesh": {"kind": "rect", "x": [0, 3.141592653589793], "y": [0, 3.141592653589793], "n": 8},
                                        "levels": 2, "refine_time": true, "output": "run"})");
  const auto r = run_cli("gns --config " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  const auto report = json::parse(presslens::io::read_text(dir / "run/report.json"));
  CHECK(report["split_ok"] == true);
  REQUIRE(report["levels"].size() == 2);
  CHECK(report["levels"][1]["M"] == 17);
  CHECK(report["levels"][1]["total_pressure_error"].get<double>() < report["levels"][0]["total_pressure_error"].get<double>());
  CHECK(fs::exists(dir / "run/level_1/p_0_convective/series.json"));
}

TEST_CASE("verify runs a named subset and reports every check") {
  const auto dir = scratch("verify");
  const auto cfg = write_config(dir, R"({"checks": ["dense_oracle", "steklov_identities"], "output": "run"})");
  const auto r = run_cli("verify --config " + cfg.string(), dir);
  CHECK(r.code == 0);
  const auto report = json::parse(presslens::io::read_text(dir / "run/verify.json"));
  CHECK(report["passed"] == true);
  REQUIRE(report["checks"].size() == 2);
  CHECK(report["checks"][0]["name"] == "dense_oracle");
  CHECK(report["failures"].empty());
}
