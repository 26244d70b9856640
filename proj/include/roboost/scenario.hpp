#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roboost/errors.hpp"
#include "roboost/learners.hpp"
#include "roboost/predictor.hpp"
#include "roboost/space.hpp"

namespace roboost {

inline constexpr int kScenarioSchemaVersion = 1;

/// Load or validation failure, located in the source text where possible.
class ScenarioError : public InvalidArgument {
public:
  ScenarioError(const std::string& origin, std::size_t line, std::size_t column, const std::string& path,
                const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& path() const noexcept { return path_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string path_;
};

struct LearnerConfig {
  std::string kind = "scripted";  // scripted | erm | converted_erm | random_bitstring
  ScriptOptions script{};
  double epsilon = 0.05;  // erm / converted_erm
  double delta = 0.05;
  std::size_t sample_size = 1;
  bool plurality = false;
};

struct ScenarioParameters {
  std::optional<double> beta;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> eta;
  std::optional<double> gamma;
  std::optional<std::size_t> levels;
  std::optional<std::size_t> sample_size;
  Fallback fallback{};
};

struct MetricSpec {
  std::string name;  // path | grid_l1 | grid_linf
  std::size_t grid_width = 0;
  double radius = 0.0;

  Metric metric() const;
};

struct Scenario {
  std::string name;
  InstanceSpace space;
  RelationPtr relation;
  std::optional<MetricSpec> metric;
  Distribution distribution;
  Labeling concept_labels;
  std::string concept_class_kind;
  std::vector<Labeling> concept_class;
  LearnerConfig learner;
  ScenarioParameters parameters;
  std::uint64_t seed = 0;
  std::map<std::string, Point> named_points;
  std::optional<std::size_t> gadgets;
  std::vector<Label> gadget_labels;
  nlohmann::json source;
};

/// Parses and validates a schema-version-1 scenario document.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario_file(const std::string& path);

/// The k-gadget space {x_n^+, x_n^-, z_n} with U(x^+) = {x^+, z}, U(x^-) = {x^-, z},
/// U(z) = {z, x^+, x^-}, concept h_y, all 2^k bitstring concepts as the class,
/// and D supported on x_n^{y_n} with the given per-gadget masses.
Scenario build_counterexample(std::size_t k, const std::vector<Label>& y, const std::vector<double>& mass);

/// Scenario JSON that reloads into `s`.
nlohmann::json scenario_to_json(const Scenario& s);

/// Builds the learner described by the scenario.
Learner make_learner(const Scenario& s, const LearnerConfig& config, RelationPtr u);

}  // namespace roboost
