#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "roboost/harness.hpp"

namespace {

int write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return 2;
  }
  out << text;
  return 0;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw roboost::InvalidArgument("cannot open '" + path + "'");
  return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness boosting experiment harness"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string procedure;
  std::size_t trials = 1;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string csv_path;
  std::size_t threads = 0;
  bool timing = false;

  auto* validate = app.add_subcommand("validate", "Load a scenario and check it");
  validate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  validate->add_option("--procedure", procedure, "Also check the requirements of this procedure");

  auto* run = app.add_subcommand("run", "Run seeded trials and write a JSON report");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--procedure", procedure, "Procedure to run")
      ->required()
      ->check(CLI::IsMember(roboost::procedure_names()));
  run->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Run seed (default: $ROBOOST_SEED, then the scenario seed)");
  run->add_option("--out", out_path, "Report path (default: stdout)");
  run->add_option("--csv", csv_path, "Per-round CSV path");
  run->add_option("--threads", threads, "Worker threads (default: hardware concurrency)");
  run->add_flag("--timing", timing, "Print wall-clock time to stderr");

  std::size_t gadgets = 0;
  std::vector<int> labels;
  std::vector<double> mass;
  auto* counterexample = app.add_subcommand("counterexample", "Write a k-gadget counterexample scenario");
  counterexample->add_option("--gadgets", gadgets, "Gadget count k")->required()->check(CLI::PositiveNumber);
  counterexample->add_option("--labels", labels, "Realizable labels y_n in {-1,+1} (default alternating)");
  counterexample->add_option("--mass", mass, "Per-gadget masses (default uniform)");
  counterexample->add_option("--seed", seed, "Seed stored in the scenario");
  counterexample->add_option("--out", out_path, "Scenario path (default: stdout)");

  std::string left;
  std::string right;
  auto* diff = app.add_subcommand("report-diff", "Compare two reports");
  diff->add_option("left", left, "First report")->required();
  diff->add_option("right", right, "Second report")->required();

  CLI11_PARSE(app, argc, argv);

  if (!seed)
    if (const char* env = std::getenv("ROBOOST_SEED")) {
      try {
        seed = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "error: ROBOOST_SEED is not an unsigned integer\n";
        return 2;
      }
    }

  try {
    if (*validate) {
      const auto s = roboost::load_scenario_file(scenario_path);
      if (!procedure.empty()) roboost::check_scenario(s, procedure);
      else if (!roboost::check_robust_realizable(s.distribution, s.concept_labels, *s.relation))
        throw roboost::InvalidArgument("the target concept is not robustly realizable on the support");
      std::cout << scenario_path << ": ok (" << s.space.point_count() << " points)\n";
      return 0;
    }
    if (*run) {
      const auto s = roboost::load_scenario_file(scenario_path);
      const auto report = roboost::run_scenario(s, procedure, {trials, seed, threads});
      if (int rc = write_text(out_path, report.document.dump(2) + "\n")) return rc;
      if (!csv_path.empty())
        if (int rc = write_text(csv_path, report.csv)) return rc;
      if (timing) std::cerr << "wall-clock: " << report.seconds << " s\n";
      for (const auto& a : report.document["assertions"]) {
        if (a["passed"].get<bool>()) continue;
        const auto& failures = a["failures"];
        for (std::size_t i = 0; i < failures.size() && i < 5; ++i) {
          const auto& f = failures[i];
          std::cerr << "FAIL " << a["tag"].get<std::string>() << " trial=" << f["trial"].dump()
                      << " seed=" << f["seed"].dump() << ": " << f["detail"].get<std::string>() << "\n";
        }
        if (failures.size() > 5) std::cerr << "FAIL " << a["tag"].get<std::string>() << ": " << failures.size() - 5 << " more\n";
      }
      return report.passed ? 0 : 1;
    }
    if (*counterexample) {
      if (labels.empty())
        for (std::size_t n = 0; n < gadgets; ++n) labels.push_back(n % 2 == 0 ? +1 : -1);
      if (mass.empty()) mass.assign(gadgets, 1.0 / static_cast<double>(gadgets));
      auto s = roboost::build_counterexample(gadgets, labels, mass);
      s.seed = seed.value_or(0);
      return write_text(out_path, roboost::scenario_to_json(s).dump(2) + "\n");
    }
    if (*diff) {
      const auto lines = roboost::diff_reports(read_json(left), read_json(right));
      for (const auto& l : lines) std::cout << l << "\n";
      return lines.empty() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
