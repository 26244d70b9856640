#include "roboost/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace roboost {

using nlohmann::json;

namespace {

struct FieldError {
  std::string path;
  std::string message;
};

[[noreturn]] void fail(const std::string& path, const std::string& message) { throw FieldError{path, message}; }

// Best-effort position of a JSON pointer in the raw text: follows the object
// keys in order and ignores array indices.
std::pair<std::size_t, std::size_t> locate(const std::string& text, const std::string& pointer) {
  std::size_t pos = 0;
  std::stringstream parts(pointer);
  std::string token;
  while (std::getline(parts, token, '/')) {
    if (token.empty() || std::all_of(token.begin(), token.end(), ::isdigit)) continue;
    const auto found = text.find("\"" + token + "\"", pos);
    if (found == std::string::npos) break;
    pos = found;
  }
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::pair<std::size_t, std::size_t> offset_to_line(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "expected a finite number");
  return d;
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::optional<double> opt_number(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return number(*it, path + "/" + key);
}

std::optional<std::size_t> opt_count(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return count(*it, path + "/" + key);
}

Label label_value(const json& v, const InstanceSpace& space, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer label");
  const Label y = v.get<Label>();
  if (!space.has_label(y)) fail(path, "label " + std::to_string(y) + " is not in the label set");
  return y;
}

Labeling parse_labeling(const json& v, const InstanceSpace& space, const std::string& path) {
  const auto n = space.point_count();
  if (v.is_object()) {
    if (auto it = v.find("threshold"); it != v.end()) {
      const auto theta = count(*it, path + "/threshold");
      std::vector<Label> h(n);
      for (Point x = 0; x < n; ++x) h[x] = x >= theta ? +1 : -1;
      for (Label y : h)
        if (!space.has_label(y)) fail(path, "threshold concepts need labels -1 and +1");
      return Labeling(std::move(h));
    }
    fail(path, "expected a label array or {\"threshold\": theta}");
  }
  if (!v.is_array()) fail(path, "expected a label array");
  if (v.size() != n) fail(path, "expected " + std::to_string(n) + " labels, got " + std::to_string(v.size()));
  std::vector<Label> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = label_value(v[i], space, path + "/" + std::to_string(i));
  return Labeling(std::move(h));
}

PointSet parse_points(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of points");
  PointSet out(n);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = count(v[i], path + "/" + std::to_string(i));
    if (x >= n) fail(path + "/" + std::to_string(i), "point " + std::to_string(x) + " is out of range");
    out.insert(x);
  }
  return out;
}

Distribution parse_distribution(const json& v, std::size_t n, const std::string& path) {
  try {
    if (v.is_array()) {
      if (v.size() != n) fail(path, "expected " + std::to_string(n) + " masses, got " + std::to_string(v.size()));
      std::vector<double> mass(n);
      for (std::size_t i = 0; i < n; ++i) mass[i] = number(v[i], path + "/" + std::to_string(i));
      return Distribution(std::move(mass));
    }
    if (v.is_object()) {
      if (auto it = v.find("uniform_on"); it != v.end())
        return Distribution::uniform(n, parse_points(*it, n, path + "/uniform_on"));
      if (auto it = v.find("weights"); it != v.end()) {
        if (!it->is_array() || it->size() != n) fail(path + "/weights", "expected " + std::to_string(n) + " weights");
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = number((*it)[i], path + "/weights/" + std::to_string(i));
        return Distribution::from_weights(std::move(w));
      }
      if (v.value("uniform", false)) return Distribution::uniform(n);
    }
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  } catch (const EmptyEvent& e) {
    fail(path, e.what());
  }
  fail(path, "expected a mass array, {\"uniform_on\": [...]}, {\"weights\": [...]} or {\"uniform\": true}");
}

Fallback parse_fallback(const json& v, const InstanceSpace& space, const std::string& path) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "first_stage_raw") return {FallbackRule::first_stage_raw, 0};
    if (s == "last_stage_raw") return {FallbackRule::last_stage_raw, 0};
    fail(path, "unknown fallback rule '" + s + "'");
  }
  if (v.is_object() && v.contains("fixed"))
    return {FallbackRule::fixed_label, label_value(v["fixed"], space, path + "/fixed")};
  fail(path, "expected \"first_stage_raw\", \"last_stage_raw\" or {\"fixed\": label}");
}

LearnerConfig parse_learner(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  LearnerConfig c;
  if (auto it = v.find("kind"); it != v.end()) {
    if (!it->is_string()) fail(path + "/kind", "expected a string");
    c.kind = it->get<std::string>();
  }
  if (c.kind != "scripted" && c.kind != "erm" && c.kind != "converted_erm" && c.kind != "random_bitstring")
    fail(path + "/kind", "unknown learner kind '" + c.kind + "'");
  if (auto b = opt_number(v, "beta", path)) c.script.beta = *b;
  if (auto e = opt_number(v, "epsilon_prime", path)) c.script.epsilon_prime = *e;
  if (auto e = opt_number(v, "eta", path)) c.script.eta = *e;
  if (auto e = opt_number(v, "epsilon", path)) c.epsilon = *e;
  if (auto d = opt_number(v, "delta", path)) {
    c.delta = *d;
    c.script.delta = *d;
  }
  if (auto m = opt_count(v, "sample_size", path)) c.sample_size = *m;
  if (auto it = v.find("mode"); it != v.end()) {
    const auto mode = it->is_string() ? it->get<std::string>() : std::string();
    if (mode == "exact_beta") {
      c.script.mode = ScriptMode::exact_beta;
    } else if (mode == "noise_tolerant") {
      c.script.mode = ScriptMode::noise_tolerant;
    } else {
      fail(path + "/mode", "expected \"exact_beta\" or \"noise_tolerant\"");
    }
  }
  if (auto it = v.find("plurality"); it != v.end()) {
    if (!it->is_boolean()) fail(path + "/plurality", "expected a boolean");
    c.plurality = it->get<bool>();
  }
  if (c.sample_size == 0) fail(path + "/sample_size", "must be at least 1");
  return c;
}

ScenarioParameters parse_parameters(const json& v, const InstanceSpace& space, const std::string& path) {
  ScenarioParameters p;
  if (v.is_null()) return p;
  if (!v.is_object()) fail(path, "expected an object");
  p.beta = opt_number(v, "beta", path);
  p.epsilon = opt_number(v, "epsilon", path);
  p.delta = opt_number(v, "delta", path);
  p.eta = opt_number(v, "eta", path);
  p.gamma = opt_number(v, "gamma", path);
  p.levels = opt_count(v, "levels", path);
  p.sample_size = opt_count(v, "sample_size", path);
  if (auto it = v.find("fallback"); it != v.end()) p.fallback = parse_fallback(*it, space, path + "/fallback");
  if (p.beta && !(*p.beta > 0.0 && *p.beta <= 1.0)) fail(path + "/beta", "must lie in (0, 1]");
  if (p.epsilon && !(*p.epsilon > 0.0 && *p.epsilon < 1.0)) fail(path + "/epsilon", "must lie in (0, 1)");
  if (p.delta && !(*p.delta > 0.0 && *p.delta < 1.0)) fail(path + "/delta", "must lie in (0, 1)");
  if (p.eta && *p.eta < 0.0) fail(path + "/eta", "must be nonnegative");
  if (p.gamma && *p.gamma <= 0.0) fail(path + "/gamma", "must be positive");
  return p;
}

struct RelationParse {
  RelationPtr relation;
  std::optional<MetricSpec> metric;
};

RelationParse parse_relation(const json& v, const InstanceSpace& space, const std::string& path) {
  const auto& kind_v = member(v, "kind", path);
  if (!kind_v.is_string()) fail(path + "/kind", "expected a string");
  const auto kind = kind_v.get<std::string>();
  if (kind == "metric_ball") {
    MetricSpec spec;
    spec.name = v.value("metric", std::string("path"));
    if (spec.name != "path" && spec.name != "grid_l1" && spec.name != "grid_linf")
      fail(path + "/metric", "unknown metric '" + spec.name + "'");
    if (spec.name != "path") {
      spec.grid_width = count(member(v, "grid_width", path), path + "/grid_width");
      if (spec.grid_width == 0) fail(path + "/grid_width", "must be positive");
    }
    spec.radius = number(member(v, "radius", path), path + "/radius");
    if (spec.radius < 0.0) fail(path + "/radius", "radius must be nonnegative");
    return {share(make_metric_ball(space, spec.metric(), spec.radius)), spec};
  }
  if (kind == "adjacency") {
    const auto& rows = member(v, "neighbors", path);
    if (!rows.is_array() || rows.size() != space.point_count())
      fail(path + "/neighbors", "expected one neighbor list per point");
    std::vector<PointSet> sets;
    for (std::size_t x = 0; x < rows.size(); ++x)
      sets.push_back(parse_points(rows[x], space.point_count(), path + "/neighbors/" + std::to_string(x)));
    return {share(PerturbationRelation(space, std::move(sets))), std::nullopt};
  }
  if (kind == "counterexample") fail(path + "/kind", "the counterexample relation needs a \"counterexample\" section");
  fail(path + "/kind", "unknown relation kind '" + kind + "'");
}

std::vector<Labeling> parse_class(const json& v, const InstanceSpace& space, std::string& kind,
                                  const std::string& path) {
  if (v.is_null()) {
    kind = "none";
    return {};
  }
  const auto& k = member(v, "kind", path);
  kind = k.is_string() ? k.get<std::string>() : std::string();
  if (kind == "thresholds") return threshold_class(space.point_count());
  if (kind == "explicit") {
    const auto& members = member(v, "members", path);
    if (!members.is_array() || members.empty()) fail(path + "/members", "expected a nonempty array of labelings");
    std::vector<Labeling> out;
    for (std::size_t i = 0; i < members.size(); ++i)
      out.push_back(parse_labeling(members[i], space, path + "/members/" + std::to_string(i)));
    return out;
  }
  if (kind == "bitstrings") fail(path + "/kind", "bitstring classes need a \"counterexample\" section");
  fail(path + "/kind", "unknown concept class kind '" + kind + "'");
}

Scenario parse_document(const json& doc) {
  if (!doc.is_object()) fail("", "a scenario must be a JSON object");
  const auto& version = member(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kScenarioSchemaVersion)
    fail("/schema_version", "unsupported schema version (expected " + std::to_string(kScenarioSchemaVersion) + ")");

  std::optional<Scenario> base;
  if (auto it = doc.find("counterexample"); it != doc.end()) {
    const std::string path = "/counterexample";
    const auto k = count(member(*it, "gadgets", path), path + "/gadgets");
    if (k == 0) fail(path + "/gadgets", "must be at least 1");
    std::vector<Label> y(k);
    for (std::size_t n = 0; n < k; ++n) y[n] = n % 2 == 0 ? +1 : -1;
    if (auto ly = it->find("labels"); ly != it->end()) {
      if (!ly->is_array() || ly->size() != k) fail(path + "/labels", "expected one label per gadget");
      for (std::size_t n = 0; n < k; ++n) {
        if (!(*ly)[n].is_number_integer()) fail(path + "/labels/" + std::to_string(n), "expected -1 or +1");
        y[n] = (*ly)[n].get<Label>();
        if (y[n] != -1 && y[n] != +1) fail(path + "/labels/" + std::to_string(n), "expected -1 or +1");
      }
    }
    std::vector<double> mass(k, 1.0 / static_cast<double>(k));
    if (auto lm = it->find("mass"); lm != it->end()) {
      if (!lm->is_array() || lm->size() != k) fail(path + "/mass", "expected one mass per gadget");
      for (std::size_t n = 0; n < k; ++n) mass[n] = number((*lm)[n], path + "/mass/" + std::to_string(n));
    }
    try {
      base = build_counterexample(k, y, mass);
    } catch (const InvalidArgument& e) {
      fail(path, e.what());
    }
  }

  if (!base) {
    const auto& sp = member(doc, "space", "");
    const auto n = count(member(sp, "points", "/space"), "/space/points");
    std::vector<Label> labels{-1, +1};
    if (auto it = sp.find("labels"); it != sp.end()) {
      if (!it->is_array()) fail("/space/labels", "expected an array of integer labels");
      labels.clear();
      for (std::size_t i = 0; i < it->size(); ++i) {
        if (!(*it)[i].is_number_integer()) fail("/space/labels/" + std::to_string(i), "expected an integer label");
        labels.push_back((*it)[i].get<Label>());
      }
    }
    std::optional<InstanceSpace> space;
    try {
      space.emplace(n, labels);
    } catch (const InvalidArgument& e) {
      fail("/space", e.what());
    }
    auto rel = parse_relation(member(doc, "relation", ""), *space, "/relation");
    auto dist = parse_distribution(member(doc, "distribution", ""), n, "/distribution");
    auto c = parse_labeling(member(doc, "concept", ""), *space, "/concept");
    std::string class_kind;
    auto cls = parse_class(doc.value("concept_class", json()), *space, class_kind, "/concept_class");
    base = Scenario{"", *space, rel.relation, rel.metric, std::move(dist), std::move(c), class_kind,
                    std::move(cls), {}, {}, 0, {}, std::nullopt, {}, json()};
  } else if (auto it = doc.find("relation"); it != doc.end()) {
    if (!it->is_object() || it->value("kind", std::string()) != "counterexample")
      fail("/relation/kind", "a counterexample scenario uses the counterexample relation");
  }

  Scenario s = std::move(*base);
  s.name = doc.value("name", std::string());
  if (auto it = doc.find("learner"); it != doc.end()) s.learner = parse_learner(*it, "/learner");
  s.parameters = parse_parameters(doc.value("parameters", json()), s.space, "/parameters");
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
      fail("/seed", "expected a nonnegative integer");
    s.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("named_points"); it != doc.end()) {
    if (!it->is_object()) fail("/named_points", "expected an object of name -> point");
    for (const auto& [name, value] : it->items()) {
      const auto x = count(value, "/named_points/" + name);
      if (x >= s.space.point_count()) fail("/named_points/" + name, "point is out of range");
      s.named_points[name] = x;
    }
  }
  if (s.learner.kind == "erm" || s.learner.kind == "converted_erm")
    if (s.concept_class.empty()) fail("/concept_class", "ERM learners need a concept class");
  if (s.learner.kind == "random_bitstring" && !s.gadgets)
    fail("/learner/kind", "the random bitstring learner needs a counterexample scenario");
  s.source = doc;
  return s;
}

}  // namespace

ScenarioError::ScenarioError(const std::string& origin, std::size_t line, std::size_t column,
                             const std::string& path, const std::string& message)
    : InvalidArgument(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                      (path.empty() ? std::string() : path + ": ") + message),
      line_(line),
      column_(column),
      path_(path) {}

Metric MetricSpec::metric() const {
  if (name == "path") return path_metric();
  if (name == "grid_l1") return grid_l1_metric(grid_width);
  if (name == "grid_linf") return grid_linf_metric(grid_width);
  throw InvalidArgument("unknown metric '" + name + "'");
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, column] = offset_to_line(text, e.byte);
    throw ScenarioError(origin, line, column, "", std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_document(doc);
  } catch (const FieldError& e) {
    auto [line, column] = locate(text, e.path);
    throw ScenarioError(origin, line, column, e.path, e.message);
  } catch (const ScenarioError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ScenarioError(origin, 1, 1, "", e.what());
  }
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path);
}

Scenario build_counterexample(std::size_t k, const std::vector<Label>& y, const std::vector<double>& mass) {
  if (k == 0) throw InvalidArgument("the counterexample needs at least one gadget");
  if (y.size() != k || mass.size() != k) throw InvalidArgument("expected one label and one mass per gadget");
  const auto n = 3 * k;
  auto space = InstanceSpace::binary(n);
  std::vector<PointSet> rows(n, PointSet(n));
  std::vector<double> d(n, 0.0);
  std::map<std::string, Point> names;
  for (std::size_t g = 0; g < k; ++g) {
    const Point xp = 3 * g;
    const Point xm = 3 * g + 1;
    const Point z = 3 * g + 2;
    rows[xp] = PointSet::of(n, {xp, z});
    rows[xm] = PointSet::of(n, {xm, z});
    rows[z] = PointSet::of(n, {z, xp, xm});
    if (y[g] != -1 && y[g] != +1) throw InvalidArgument("gadget labels must be -1 or +1");
    if (!(mass[g] >= 0.0)) throw InvalidArgument("gadget masses must be nonnegative");
    d[y[g] == +1 ? xp : xm] = mass[g];
    const auto id = std::to_string(g + 1);
    names["x" + id + "+"] = xp;
    names["x" + id + "-"] = xm;
    names["z" + id] = z;
  }
  Scenario s{"counterexample-" + std::to_string(k),
             space,
             share(PerturbationRelation(space, std::move(rows))),
             std::nullopt,
             Distribution(std::move(d)),
             bitstring_concept(y),
             "bitstrings",
             k < 16 ? bitstring_class(k) : std::vector<Labeling>{},
             {},
             {},
             0,
             std::move(names),
             k,
             y,
             json()};
  s.learner.kind = "random_bitstring";
  s.source = scenario_to_json(s);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  if (!s.name.empty()) doc["name"] = s.name;
  if (s.gadgets) {
    std::vector<double> mass;
    for (std::size_t g = 0; g < *s.gadgets; ++g)
      mass.push_back(s.distribution[s.gadget_labels[g] == +1 ? 3 * g : 3 * g + 1]);
    doc["counterexample"] = {{"gadgets", *s.gadgets}, {"labels", s.gadget_labels}, {"mass", mass}};
    doc["relation"] = {{"kind", "counterexample"}};
  } else {
    doc["space"] = {{"points", s.space.point_count()},
                    {"labels", std::vector<Label>(s.space.labels().begin(), s.space.labels().end())}};
    if (s.metric) {
      json r = {{"kind", "metric_ball"}, {"metric", s.metric->name}, {"radius", s.metric->radius}};
      if (s.metric->name != "path") r["grid_width"] = s.metric->grid_width;
      doc["relation"] = r;
    } else {
      doc["relation"] = {{"kind", "adjacency"}, {"neighbors", s.relation->adjacency()}};
    }
    doc["distribution"] = std::vector<double>(s.distribution.masses().begin(), s.distribution.masses().end());
    doc["concept"] = std::vector<Label>(s.concept_labels.values().begin(), s.concept_labels.values().end());
    if (s.concept_class_kind == "thresholds") {
      doc["concept_class"] = {{"kind", "thresholds"}};
    } else if (s.concept_class_kind == "explicit") {
      json members = json::array();
      for (const auto& h : s.concept_class) members.push_back(std::vector<Label>(h.values().begin(), h.values().end()));
      doc["concept_class"] = {{"kind", "explicit"}, {"members", members}};
    }
  }
  const auto& l = s.learner;
  json learner = {{"kind", l.kind}, {"sample_size", l.sample_size}};
  if (l.kind == "scripted") {
    learner["beta"] = l.script.beta;
    learner["epsilon_prime"] = l.script.epsilon_prime;
    learner["mode"] = l.script.mode == ScriptMode::exact_beta ? "exact_beta" : "noise_tolerant";
    learner["eta"] = l.script.eta;
    learner["delta"] = l.script.delta;
  } else if (l.kind == "erm" || l.kind == "converted_erm") {
    learner["epsilon"] = l.epsilon;
    learner["delta"] = l.delta;
    if (l.plurality) learner["plurality"] = true;
  }
  doc["learner"] = learner;
  json params = json::object();
  const auto& p = s.parameters;
  if (p.beta) params["beta"] = *p.beta;
  if (p.epsilon) params["epsilon"] = *p.epsilon;
  if (p.delta) params["delta"] = *p.delta;
  if (p.eta) params["eta"] = *p.eta;
  if (p.gamma) params["gamma"] = *p.gamma;
  if (p.levels) params["levels"] = *p.levels;
  if (p.sample_size) params["sample_size"] = *p.sample_size;
  switch (p.fallback.rule) {
    case FallbackRule::first_stage_raw:
      break;
    case FallbackRule::last_stage_raw:
      params["fallback"] = "last_stage_raw";
      break;
    case FallbackRule::fixed_label:
      params["fallback"] = {{"fixed", p.fallback.fixed}};
      break;
  }
  if (!params.empty()) doc["parameters"] = params;
  doc["seed"] = s.seed;
  if (!s.named_points.empty()) doc["named_points"] = s.named_points;
  return doc;
}

Learner make_learner(const Scenario& s, const LearnerConfig& config, RelationPtr u) {
  if (config.kind == "scripted") return scripted_oracle_learner(std::move(u), config.script, config.sample_size);
  if (config.kind == "erm" || config.kind == "converted_erm") {
    if (s.concept_class.empty()) throw InvalidArgument("ERM learners need a concept class");
    auto erm = erm_learner(s.concept_class, u, config.sample_size, {config.epsilon, config.delta});
    if (config.kind == "erm") return erm;
    return convert_strong_to_barely(std::move(erm), std::move(u), {config.plurality});
  }
  if (config.kind == "random_bitstring") {
    if (!s.gadgets) throw InvalidArgument("the random bitstring learner needs a counterexample scenario");
    return random_bitstring_learner(*s.gadgets);
  }
  throw InvalidArgument("unknown learner kind '" + config.kind + "'");
}

}  // namespace roboost
