#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "presslens/commands.hpp"
#include "presslens/config.hpp"

namespace {

using nlohmann::json;
namespace cmd = presslens::commands;

json brief(const presslens::RunConfig& c, const cmd::CommandResult& r) {
  json out = {{"command", c.command}, {"exit_code", r.exit_code}, {"output", c.output.string()}};
  if (c.command == "verify") {
    json checks = json::array();
    for (const auto& check : r.report["checks"])
      checks.push_back({{"name", check["name"]}, {"passed", check["passed"]}, {"detail", check["detail"]}});
    out["passed"] = r.report["passed"];
    out["failures"] = r.report["failures"];
    out["checks"] = checks;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"presslens: local pressure decomposition with Taylor-Hood Stokes solves"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 0;
  for (const char* name : {"mesh", "solve", "project", "decompose", "gns", "verify", "export-vtk"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    json err = {{"error", {{"type", "usage"}, {"message", e.what()}, {"exit_code", cmd::exit_code::config}}}};
    std::cout << err.dump() << std::endl;
    return cmd::exit_code::config;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    auto config = presslens::load_config(config_path);
    if (!config.command.empty() && config.command != command)
      throw presslens::ConfigError("config is for command '" + config.command + "', not '" + command + "'");
    config.command = command;
    if (!out_dir.empty()) config.output = out_dir;
    if (threads != 0) config.threads = threads;
    presslens::validate(config);
    const auto result = cmd::run(config);
    std::cout << brief(config, result).dump(1) << std::endl;
    return result.exit_code;
  } catch (...) {
    const auto err = cmd::describe_current_exception();
    std::cout << err.body.dump() << std::endl;
    return err.exit_code;
  }
}
