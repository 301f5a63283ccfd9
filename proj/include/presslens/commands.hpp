#pragma once

#include <string>

#include <json.hpp>

#include "presslens/config.hpp"
#include "presslens/gns.hpp"

namespace presslens::commands {

namespace exit_code {
constexpr int ok = 0;
constexpr int verify_failed = 1;
constexpr int config = 2;
constexpr int io = 3;
constexpr int checksum = 4;
constexpr int solver = 5;
constexpr int invalid_input = 6;
}  // namespace exit_code

struct CommandResult {
  int exit_code = exit_code::ok;
  /// Written to <output>/report.json (verify: verify.json).
  nlohmann::json report;
};

/// Dispatches on c.command. Files go under c.output. Errors propagate as exceptions;
/// run_guarded maps them to exit codes.
CommandResult run(const RunConfig& c);

CommandResult cmd_mesh(const RunConfig& c);
CommandResult cmd_solve(const RunConfig& c);
CommandResult cmd_project(const RunConfig& c);
CommandResult cmd_decompose(const RunConfig& c);
CommandResult cmd_gns(const RunConfig& c);
CommandResult cmd_verify(const RunConfig& c);
CommandResult cmd_export_vtk(const RunConfig& c);

/// {"error": {"type", "message", "exit_code"}} for the current exception.
struct ErrorReport {
  int exit_code = exit_code::invalid_input;
  nlohmann::json body;
};
ErrorReport describe_current_exception();

/// The corpus problem of `c` on refinement level `level` (corpus potential-flow or taylor-green).
GnsProblem build_problem(const RunConfig& c, int level);

}  // namespace presslens::commands
