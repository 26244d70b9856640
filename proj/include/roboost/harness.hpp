#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roboost/scenario.hpp"

namespace roboost {

inline constexpr int kReportVersion = 1;

/// roboost, alpha, two_layer, uroboost, granular, convert, counterexample-eval
const std::vector<std::string>& procedure_names();

/// Throws InvalidArgument when `s` lacks what `procedure` needs, or when the
/// target is not robustly realizable on the support.
void check_scenario(const Scenario& s, const std::string& procedure);

struct RunOptions {
  std::size_t trials = 1;
  /// Defaults to the scenario's seed.
  std::optional<std::uint64_t> seed;
  /// 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

struct Report {
  nlohmann::json document;
  std::string csv;
  bool passed = false;
  double seconds = 0.0;  // kept out of the document so replays stay identical
};

/// Runs `trials` seeded trials; trial i uses derive_seed(seed, i).
Report run_scenario(const Scenario& s, const std::string& procedure, const RunOptions& options);

/// One line per differing JSON path, "op path"; empty when the reports match.
std::vector<std::string> diff_reports(const nlohmann::json& a, const nlohmann::json& b);

}  // namespace roboost
