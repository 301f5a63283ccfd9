#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace presslens::verify {

struct CheckResult {
  std::string name;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  double budget = 0.0;
  /// One-line summary of the decisive numbers.
  std::string detail;
  nlohmann::json metrics;
};

/// Names of the acceptance checks in criterion order.
const std::vector<std::string>& check_names();

/// Runs one check. The verdict includes the runtime budget. Throws
/// std::invalid_argument for an unknown name.
CheckResult run_check(const std::string& name, int threads = 1);

std::vector<CheckResult> run_checks(const std::vector<std::string>& names, int threads = 1);

nlohmann::json to_json(const CheckResult& r);
/// {"passed": all, "checks": [...], "failures": [names]}.
nlohmann::json summary_json(const std::vector<CheckResult>& results);

}  // namespace presslens::verify
