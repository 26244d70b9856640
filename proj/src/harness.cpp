#include "roboost/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <thread>

#include "roboost/boost.hpp"
#include "roboost/errors.hpp"
#include "roboost/risk.hpp"

namespace roboost {

using nlohmann::json;

namespace {

constexpr double kTol = kMassTolerance;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Check {
  std::string tag;
  bool passed;
  std::string detail;
};

struct TrialOutcome {
  json detail = json::object();
  std::vector<Check> checks;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, double> metrics;
  std::optional<std::string> error;
};

struct Aggregate {
  std::string tag;
  bool passed;
  std::string detail;
};

struct Plan {
  std::vector<std::string> tags;
  std::function<TrialOutcome(std::uint64_t)> trial;
  std::function<std::vector<Aggregate>(const std::vector<TrialOutcome>&, json&)> aggregate;
};

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw InvalidArgument(std::string("parameters.") + name + " is required for this procedure");
  return *v;
}

double beta_of(const Scenario& s) {
  if (s.parameters.beta) return *s.parameters.beta;
  if (s.learner.kind == "scripted") return s.learner.script.beta;
  throw InvalidArgument("parameters.beta is required for this procedure");
}

json labels_json(const Labeling& h) { return json(std::vector<Label>(h.values().begin(), h.values().end())); }

std::string fallback_tag(const Fallback& f) {
  switch (f.rule) {
    case FallbackRule::first_stage_raw:
      return "first_stage_raw";
    case FallbackRule::last_stage_raw:
      return "last_stage_raw";
    case FallbackRule::fixed_label:
      break;
  }
  return "fixed:" + std::to_string(f.fixed);
}

// Stage relations are named by `relation_name(t)`, t counted from 0.
json cascade_json(const CascadePredictor& cascade, const std::function<std::string(std::size_t)>& relation_name) {
  json stages = json::array();
  for (std::size_t t = 0; t < cascade.size(); ++t)
    stages.push_back({{"hypothesis", labels_json(cascade.stages()[t].hypothesis())}, {"relation", relation_name(t)}});
  return {{"kind", "cascade"}, {"fallback", fallback_tag(cascade.fallback())}, {"stages", std::move(stages)}};
}

json risk_json(const Labeling& h, const Scenario& s, const PerturbationRelation& u, const std::string& name) {
  const auto r = risk_report(h, s.distribution, s.concept_labels, u, name);
  return {{"relation", r.relation},
          {"robust_risk", r.robust_risk},
          {"natural_error", r.natural_error},
          {"robustness_mass", r.robustness_mass}};
}

std::string scenario_relation(std::size_t) { return "scenario"; }

double contract_epsilon(const ContractTerms& terms) {
  return std::visit([](const auto& t) { return t.epsilon; }, terms);
}

json run_json(const BoostRun& run) {
  json rounds = json::array();
  for (const auto& r : run.rounds) {
    json j = {{"t", r.t},
              {"draws", r.draws},
              {"sample_size", r.sample_size},
              {"beta_t", opt(r.beta_t)},
              {"natural_error", opt(r.natural_error)},
              {"p_t", opt(r.residual)},
              {"attempts", r.attempts},
              {"contract_violation", r.contract_violation}};
    if (r.radius) j["radius"] = *r.radius;
    if (r.weighted_risk) j["weighted_risk"] = *r.weighted_risk;
    if (r.weight_sum) j["weight_sum"] = *r.weight_sum;
    rounds.push_back(std::move(j));
  }
  return {{"procedure", run.procedure},
          {"planned_rounds", run.planned_rounds},
          {"completed_rounds", run.rounds.size()},
          {"sample_size", run.sample_size},
          {"per_point_budget", run.per_point_budget},
          {"labeled_draws", run.labeled_draws},
          {"unlabeled_draws", run.unlabeled_draws},
          {"oracle_calls", run.oracle_calls},
          {"early_stop", run.early_stop},
          {"flagged", run.flagged()},
          {"seed", run.seed},
          {"rounds", std::move(rounds)}};
}

std::string cell(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void round_rows(TrialOutcome& out, const BoostRun& run, bool unlabeled) {
  for (const auto& r : run.rounds) {
    const auto draws = std::to_string(r.draws);
    out.rows.push_back({std::to_string(r.t), cell(r.beta_t), cell(r.residual), unlabeled ? "0" : draws,
                        unlabeled ? draws : "0", "", cell(r.natural_error)});
  }
}

void final_row(TrialOutcome& out, std::size_t labeled, std::size_t unlabeled, double risk, double nat) {
  out.rows.push_back({"final", "", "", std::to_string(labeled), std::to_string(unlabeled), fmt(risk), fmt(nat)});
}

Aggregate rate_check(const std::string& tag, const std::vector<TrialOutcome>& trials, const std::string& metric,
                     double allowed, const std::string& what) {
  std::size_t bad = 0;
  for (const auto& t : trials)
    if (t.error || t.metrics.count(metric) == 0 || t.metrics.at(metric) != 0.0) ++bad;
  const double rate = static_cast<double>(bad) / static_cast<double>(trials.size());
  return {tag, rate <= allowed + kTol,
          what + " in " + std::to_string(bad) + "/" + std::to_string(trials.size()) + " trials (rate " + fmt(rate) +
              ", allowed " + fmt(allowed) + ")"};
}

double mean_metric(const std::vector<TrialOutcome>& trials, const std::string& metric) {
  std::vector<double> v;
  for (const auto& t : trials)
    if (auto it = t.metrics.find(metric); it != t.metrics.end()) v.push_back(it->second);
  return v.empty() ? 0.0 : stable_sum(v) / static_cast<double>(v.size());
}

std::size_t count_metric(const std::vector<TrialOutcome>& trials, const std::string& metric) {
  std::size_t n = 0;
  for (const auto& t : trials)
    if (auto it = t.metrics.find(metric); it != t.metrics.end() && it->second != 0.0) ++n;
  return n;
}

Plan roboost_plan(const Scenario& s) {
  const double beta = beta_of(s);
  const double eps = require(s.parameters.epsilon, "epsilon");
  const double delta = require(s.parameters.delta, "delta");
  const auto probe = make_learner(s, s.learner, s.relation);
  const double eps_a = contract_epsilon(probe.terms());
  const auto rounds = roboost_rounds(beta, eps);
  const auto m = roboost_sample_size(probe.sample_size(), rounds, delta);
  const double draw_cap = 4.0 * static_cast<double>(rounds * m) / eps;

  Plan plan;
  plan.tags = {"residual-contraction", "cascade-risk-bound", "target-risk", "sample-budget"};
  plan.trial = [&s, beta, eps, delta, eps_a, draw_cap](std::uint64_t seed) {
    TrialOutcome out;
    SamplingOracle oracle(s.distribution, s.concept_labels, derive_seed(seed, 0));
    const auto a = make_learner(s, s.learner, s.relation);
    auto r = beta_roboost(oracle, a, {beta, eps, delta}, s.relation, {s.parameters.fallback, derive_seed(seed, 1), {}});
    const double risk = robust_risk(r.cascade, s.distribution, s.concept_labels, *s.relation);
    const double nat = natural_error(r.cascade.tabulate(), s.distribution, s.concept_labels);
    const bool flagged = r.run.flagged();
    const auto t_star = r.run.rounds.size();

    if (!flagged) {
      for (const auto& rec : r.run.rounds) {
        const double bound = std::pow(1.0 - beta, static_cast<double>(rec.t));
        out.checks.push_back({"residual-contraction", *rec.residual <= bound + kTol,
                              "round " + std::to_string(rec.t) + ": p_t = " + fmt(*rec.residual) + ", bound " +
                                  fmt(bound)});
      }
      const double bound = eps_a / beta + std::pow(1.0 - beta, static_cast<double>(t_star));
      out.checks.push_back(
          {"cascade-risk-bound", risk <= bound + kTol, "robust risk " + fmt(risk) + ", bound " + fmt(bound)});
      out.checks.push_back({"target-risk", risk <= eps + kTol, "robust risk " + fmt(risk) + ", epsilon " + fmt(eps)});
    }
    const auto draws = r.run.labeled_draws;
    out.metrics["over_budget"] = static_cast<double>(draws) > draw_cap ? 1.0 : 0.0;
    out.metrics["robust_risk"] = risk;
    out.metrics["flagged"] = flagged ? 1.0 : 0.0;
    out.detail = {{"run", run_json(r.run)},
                  {"robust_risk", risk},
                  {"natural_error", nat},
                  {"draw_cap", draw_cap},
                  {"predictor", cascade_json(r.cascade, scenario_relation)},
                  {"risk_report", risk_json(r.cascade.tabulate(), s, *s.relation, "scenario")}};
    round_rows(out, r.run, false);
    final_row(out, draws, 0, risk, nat);
    return out;
  };
  plan.aggregate = [delta, rounds, m](const std::vector<TrialOutcome>& trials, json& summary) {
    const double allowed = delta / 2.0 + 3.0 * std::sqrt(delta / static_cast<double>(trials.size()));
    summary = {{"planned_rounds", rounds},
               {"sample_size", m},
               {"mean_robust_risk", mean_metric(trials, "robust_risk")},
               {"flagged_trials", count_metric(trials, "flagged")}};
    return std::vector<Aggregate>{rate_check("sample-budget", trials, "over_budget", allowed, "draw cap exceeded")};
  };
  return plan;
}

Plan uroboost_plan(const Scenario& s) {
  const double beta = beta_of(s);
  const double eps = require(s.parameters.epsilon, "epsilon");
  const double delta = require(s.parameters.delta, "delta");
  make_learner(s, s.learner, s.relation);

  Plan plan;
  plan.tags = {"single-labeled-batch", "target-risk"};
  plan.trial = [&s, beta, eps, delta](std::uint64_t seed) {
    TrialOutcome out;
    SamplingOracle labeled(s.distribution, s.concept_labels, derive_seed(seed, 0));
    SamplingOracle unlabeled(s.distribution, std::nullopt, derive_seed(seed, 2));
    const auto a = make_learner(s, s.learner, s.relation);
    auto r = beta_uroboost(labeled, unlabeled, a, {beta, eps, delta}, s.relation,
                           {s.parameters.fallback, derive_seed(seed, 1), {}});
    const auto& run = r.boost.run;
    const double risk = robust_risk(r.boost.cascade, s.distribution, s.concept_labels, *s.relation);
    const double nat = natural_error(r.boost.cascade.tabulate(), s.distribution, s.concept_labels);
    const double pseudo_error = natural_error(r.pseudo_labeler, s.distribution, s.concept_labels);

    const bool one_batch = run.labeled_draws == a.sample_size() && labeled.drawn() == a.sample_size();
    out.checks.push_back({"single-labeled-batch", one_batch,
                          "labeled draws " + std::to_string(labeled.drawn()) + ", batch " +
                              std::to_string(a.sample_size())});
    if (!run.flagged())
      out.checks.push_back({"target-risk", risk <= eps + kTol, "robust risk " + fmt(risk) + ", epsilon " + fmt(eps)});
    out.metrics["robust_risk"] = risk;
    out.metrics["flagged"] = run.flagged() ? 1.0 : 0.0;
    out.detail = {{"run", run_json(run)},
                  {"robust_risk", risk},
                  {"natural_error", nat},
                  {"pseudo_labeler_error", pseudo_error},
                  {"pseudo_labeler", labels_json(r.pseudo_labeler)},
                  {"predictor", cascade_json(r.boost.cascade, scenario_relation)},
                  {"risk_report", risk_json(r.boost.cascade.tabulate(), s, *s.relation, "scenario")}};
    round_rows(out, run, true);
    final_row(out, run.labeled_draws, run.unlabeled_draws, risk, nat);
    return out;
  };
  plan.aggregate = [](const std::vector<TrialOutcome>& trials, json& summary) {
    summary = {{"mean_robust_risk", mean_metric(trials, "robust_risk")},
               {"flagged_trials", count_metric(trials, "flagged")}};
    return std::vector<Aggregate>{};
  };
  return plan;
}

void alpha_checks(TrialOutcome& out, const AlphaResult& r, const Scenario& s, double eps) {
  out.checks.push_back({"zero-empirical-risk", r.empirical_robust_risk == 0.0,
                        "empirical robust risk " + fmt(r.empirical_robust_risk)});
  out.checks.push_back({"margin", r.min_margin > 0.5, "minimum robust-vote margin " + fmt(r.min_margin)});
  for (const auto& rec : r.run.rounds)
    out.checks.push_back({"weights-normalized", std::abs(*rec.weight_sum - 1.0) <= 1e-9,
                          "round " + std::to_string(rec.t) + ": weight sum " + fmt(*rec.weight_sum)});
  const auto maj = r.majority.tabulate();
  const double risk = robust_risk(maj, s.distribution, s.concept_labels, *s.relation);
  const double nat = natural_error(maj, s.distribution, s.concept_labels);
  out.metrics["robust_risk"] = risk;
  out.metrics["missed_target"] = risk <= eps + kTol ? 0.0 : 1.0;
  out.detail = {{"run", run_json(r.run)},
                {"members", r.majority.members().size()},
                {"min_margin", r.min_margin},
                {"empirical_robust_risk", r.empirical_robust_risk},
                {"robust_risk", risk},
                {"natural_error", nat},
                {"predictor", {{"kind", "majority"}, {"members", r.majority.members().size()}, {"table", labels_json(maj)}}},
                {"risk_report", risk_json(maj, s, *s.relation, "scenario")}};
  for (const auto& rec : r.run.rounds)
    out.rows.push_back({std::to_string(rec.t), "", "", std::to_string(rec.draws), "0", cell(rec.weighted_risk), ""});
  final_row(out, r.run.labeled_draws, 0, risk, nat);
}

Plan alpha_plan(const Scenario& s, bool two_layer) {
  const double eps = require(s.parameters.epsilon, "epsilon");
  const double delta = require(s.parameters.delta, "delta");
  if (!s.parameters.sample_size) throw InvalidArgument("parameters.sample_size (|S|) is required for this procedure");
  const auto count = *s.parameters.sample_size;
  if (count == 0) throw InvalidArgument("parameters.sample_size must be positive");
  const auto probe = make_learner(s, s.learner, s.relation);
  if (two_layer) roboost_weak_learner(probe, s.relation);

  Plan plan;
  plan.tags = {"zero-empirical-risk", "margin", "weights-normalized", "target-risk"};
  plan.trial = [&s, eps, delta, count, two_layer](std::uint64_t seed) {
    TrialOutcome out;
    SamplingOracle oracle(s.distribution, s.concept_labels, derive_seed(seed, 0));
    const auto a = make_learner(s, s.learner, s.relation);
    if (two_layer) {
      auto r = two_layer_boost(oracle, a, count, s.relation, delta, {derive_seed(seed, 1), {}, {}});
      alpha_checks(out, r.outer, s, eps);
    } else {
      auto sample = drain(oracle, count);
      auto r = alpha_boost(sample, a, s.relation, delta, {derive_seed(seed, 1), {}, s.concept_labels});
      alpha_checks(out, r, s, eps);
    }
    return out;
  };
  plan.aggregate = [delta, eps](const std::vector<TrialOutcome>& trials, json& summary) {
    summary = {{"mean_robust_risk", mean_metric(trials, "robust_risk")}, {"epsilon", eps}};
    return std::vector<Aggregate>{
        rate_check("target-risk", trials, "missed_target", delta, "robust risk above epsilon")};
  };
  return plan;
}

Plan granular_plan(const Scenario& s) {
  if (!s.metric) throw InvalidArgument("granular runs need a metric_ball relation");
  const double beta = beta_of(s);
  const double gamma = s.parameters.gamma.value_or(s.metric->radius);
  const double eps = require(s.parameters.epsilon, "epsilon");
  const GranularParams params{gamma, s.parameters.levels.value_or(3), eps, s.parameters.sample_size.value_or(1)};
  if (params.levels == 0) throw InvalidArgument("parameters.levels must be positive");
  const auto metric = s.metric->metric();
  make_learner(s, s.learner, s.relation);

  Plan plan;
  plan.tags = {"coverage", "level1-certified"};
  plan.trial = [&s, beta, params, metric](std::uint64_t seed) {
    TrialOutcome out;
    SamplingOracle oracle(s.distribution, s.concept_labels, derive_seed(seed, 0));
    auto family = [&s](RelationPtr u) { return make_learner(s, s.learner, std::move(u)); };
    auto r = granular_boost(oracle, family, s.space, metric, params, {s.parameters.fallback, derive_seed(seed, 1), {}});
    const auto t_star = r.cascade.size();
    const auto table = r.cascade.tabulate();
    const auto& level1 = r.cascade.stages()[0];

    if (!r.run.flagged()) {
      const double bound = 1.0 - std::pow(1.0 - beta, static_cast<double>(t_star));
      out.checks.push_back({"coverage", *r.coverage >= bound - kTol,
                            "coverage " + fmt(*r.coverage) + " after " + std::to_string(t_star) + " levels, bound " +
                                fmt(bound)});
    }
    std::size_t certified = 0;
    std::size_t broken = 0;
    for (Point x : r.robust_regions[0]) {
      if (s.distribution[x] <= 0.0) continue;
      bool stable = true;
      for (Point z : level1.relation()(x)) stable = stable && table[z] == level1.hypothesis()[x];
      if (stable) {
        ++certified;
      } else {
        ++broken;
        out.checks.push_back({"level1-certified", false, "point " + std::to_string(x) + " is not stable at radius " +
                                                             fmt(r.radii[0])});
      }
    }
    if (broken == 0)
      out.checks.push_back({"level1-certified", true, std::to_string(certified) + " support points certified"});

    json levels = json::array();
    for (std::size_t t = 0; t < t_star; ++t)
      levels.push_back({{"level", t + 1},
                        {"radius", r.radii[t]},
                        {"robust_mass", s.distribution.measure(r.robust_regions[t])},
                        {"radius_robust_mass", s.distribution.measure(r.radius_robust_regions[t])}});
    const auto outer = share(make_metric_ball(s.space, metric, params.gamma));
    const double risk = robust_risk(r.cascade, s.distribution, s.concept_labels, *outer);
    const double nat = natural_error(table, s.distribution, s.concept_labels);
    out.metrics["coverage"] = *r.coverage;
    out.detail = {{"run", run_json(r.run)},
                  {"levels", std::move(levels)},
                  {"coverage", *r.coverage},
                  {"certified_points", certified},
                  {"robust_risk_at_gamma", risk},
                  {"natural_error", nat},
                  {"predictor", cascade_json(r.cascade, [&r](std::size_t t) { return "ball:" + fmt(r.radii[t]); })},
                  {"risk_report", risk_json(table, s, *outer, "ball:" + fmt(params.gamma))}};
    round_rows(out, r.run, false);
    final_row(out, r.run.labeled_draws, 0, risk, nat);
    return out;
  };
  plan.aggregate = [](const std::vector<TrialOutcome>& trials, json& summary) {
    summary = {{"mean_coverage", mean_metric(trials, "coverage")}};
    return std::vector<Aggregate>{};
  };
  return plan;
}

Plan convert_plan(const Scenario& s) {
  if (s.learner.kind != "erm" && s.learner.kind != "converted_erm")
    throw InvalidArgument("convert runs need an erm learner");
  const double eps = s.learner.epsilon;
  const double delta = s.learner.delta;
  const bool plurality = s.learner.plurality;
  const auto labels = static_cast<double>(s.space.labels().size());
  const double beta = plurality ? (1.0 - eps) / labels : (1.0 - eps) / 2.0;
  auto probe = convert_strong_to_barely(erm_learner(s.concept_class, s.relation, s.learner.sample_size, {eps, delta}),
                                        s.relation, {plurality});

  Plan plan;
  plan.tags = {"converter-guarantee"};
  plan.trial = [&s, eps, delta, beta, plurality](std::uint64_t seed) {
    TrialOutcome out;
    SamplingOracle oracle(s.distribution, s.concept_labels, derive_seed(seed, 0));
    const auto strong = erm_learner(s.concept_class, s.relation, s.learner.sample_size, {eps, delta});
    const auto converted = convert_strong_to_barely(strong, s.relation, {plurality});
    try {
      const auto h = converted.invoke(oracle, derive_seed(seed, 1));
      const double mass = robustness_mass(h, s.distribution, compose_inverse(*s.relation));
      const double nat = natural_error(h, s.distribution, s.concept_labels);
      const bool ok = mass >= beta - kTol && nat <= 2.0 * eps + kTol;
      out.metrics["failed"] = ok ? 0.0 : 1.0;
      out.metrics["robust_mass"] = mass;
      out.detail = {{"robust_mass", mass},
                    {"natural_error", nat},
                    {"draws", oracle.drawn()},
                    {"met", ok},
                    {"predictor", {{"kind", "expansion"}, {"table", labels_json(h)}}},
                    {"risk_report", risk_json(h, s, *s.relation, "scenario")}};
      out.rows.push_back({"final", fmt(mass), "", std::to_string(oracle.drawn()), "0", "", fmt(nat)});
    } catch (const BudgetExhausted& e) {
      out.metrics["failed"] = 1.0;
      out.detail = {{"budget_exhausted", e.what()}, {"draws", oracle.drawn()}, {"met", false}};
    }
    return out;
  };
  plan.aggregate = [delta, beta, eps, m = probe.sample_size()](const std::vector<TrialOutcome>& trials,
                                                               json& summary) {
    const double allowed = 2.0 * delta + 3.0 * std::sqrt(delta / static_cast<double>(trials.size()));
    summary = {{"beta", beta},
               {"natural_error_cap", 2.0 * eps},
               {"sample_size", m},
               {"mean_robust_mass", mean_metric(trials, "robust_mass")}};
    return std::vector<Aggregate>{
        rate_check("converter-guarantee", trials, "failed", allowed, "guarantee missed")};
  };
  return plan;
}

Plan counterexample_plan(const Scenario& s) {
  if (!s.gadgets) throw InvalidArgument("counterexample-eval needs a counterexample scenario");
  const auto k = *s.gadgets;
  std::vector<double> mass;
  for (std::size_t g = 0; g < k; ++g) mass.push_back(s.distribution[s.gadget_labels[g] == +1 ? 3 * g : 3 * g + 1]);

  Plan plan;
  plan.tags = {"natural-error-zero", "expected-risk-closed-form", "monte-carlo-mean"};
  plan.trial = [&s, k](std::uint64_t seed) {
    TrialOutcome out;
    SamplingOracle oracle(s.distribution, s.concept_labels, derive_seed(seed, 0));
    const auto h = random_bitstring_learner(k).invoke(oracle, derive_seed(seed, 1));
    const double nat = natural_error(h, s.distribution, s.concept_labels);
    const double risk = robust_risk(h, s.distribution, s.concept_labels, *s.relation);
    out.checks.push_back({"natural-error-zero", nat == 0.0, "natural error " + fmt(nat)});
    out.metrics["robust_risk"] = risk;
    out.detail = {{"robust_risk", risk},
                  {"natural_error", nat},
                  {"predictor", {{"kind", "bitstring"}, {"table", labels_json(h)}}},
                  {"risk_report", risk_json(h, s, *s.relation, "scenario")}};
    out.rows.push_back({"final", "", "", std::to_string(oracle.drawn()), "0", fmt(risk), fmt(nat)});
    return out;
  };
  plan.aggregate = [&s, k, mass](const std::vector<TrialOutcome>& trials, json& summary) {
    std::vector<double> halves;
    for (double w : mass) halves.push_back(w / 2.0);
    const double closed = stable_sum(halves);
    std::vector<Aggregate> out;
    std::string detail = "closed form " + fmt(closed);
    bool ok = std::abs(closed - 0.5) <= 1e-12;
    json enumerated = nullptr;
    if (k <= 16) {
      std::vector<double> risks;
      for (const auto& h : bitstring_class(k)) risks.push_back(robust_risk(h, s.distribution, s.concept_labels, *s.relation));
      const double mean = stable_sum(risks) / static_cast<double>(risks.size());
      enumerated = mean;
      ok = ok && std::abs(mean - closed) <= 1e-12;
      detail += ", enumeration over 2^" + std::to_string(k) + " learner outputs " + fmt(mean);
    }
    out.push_back({"expected-risk-closed-form", ok, detail});

    const double mc = mean_metric(trials, "robust_risk");
    const double tol = std::max(0.02, 2.0 / std::sqrt(static_cast<double>(trials.size())));
    out.push_back({"monte-carlo-mean", std::abs(mc - 0.5) <= tol,
                   "mean robust risk " + fmt(mc) + " over " + std::to_string(trials.size()) + " trials, tolerance " +
                       fmt(tol)});
    summary = {{"gadgets", k},
               {"closed_form_risk", closed},
               {"enumerated_risk", enumerated},
               {"monte_carlo_risk", mc},
               {"monte_carlo_tolerance", tol}};
    return out;
  };
  return plan;
}

Plan make_plan(const Scenario& s, const std::string& procedure) {
  if (procedure == "roboost") return roboost_plan(s);
  if (procedure == "alpha") return alpha_plan(s, false);
  if (procedure == "two_layer") return alpha_plan(s, true);
  if (procedure == "uroboost") return uroboost_plan(s);
  if (procedure == "granular") return granular_plan(s);
  if (procedure == "convert") return convert_plan(s);
  if (procedure == "counterexample-eval") return counterexample_plan(s);
  throw InvalidArgument("unknown procedure '" + procedure + "'");
}

struct Tally {
  std::string tag;
  bool passed = true;
  std::size_t checked = 0;
  std::size_t failed = 0;
  json failures = json::array();
};

}  // namespace

const std::vector<std::string>& procedure_names() {
  static const std::vector<std::string> names{"roboost",  "alpha",   "two_layer",          "uroboost",
                                              "granular", "convert", "counterexample-eval"};
  return names;
}

void check_scenario(const Scenario& s, const std::string& procedure) {
  if (std::find(procedure_names().begin(), procedure_names().end(), procedure) == procedure_names().end())
    throw InvalidArgument("unknown procedure '" + procedure + "'");
  if (!check_robust_realizable(s.distribution, s.concept_labels, *s.relation))
    throw InvalidArgument("the target concept is not robustly realizable on the support of the distribution");
  make_plan(s, procedure);
}

Report run_scenario(const Scenario& s, const std::string& procedure, const RunOptions& options) {
  if (options.trials == 0) throw InvalidArgument("at least one trial is required");
  const auto start = std::chrono::steady_clock::now();
  check_scenario(s, procedure);
  const auto plan = make_plan(s, procedure);
  const auto seed = options.seed.value_or(s.seed);

  std::vector<TrialOutcome> outcomes(options.trials);
  std::size_t threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, options.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < outcomes.size(); i = next++) {
      try {
        outcomes[i] = plan.trial(derive_seed(seed, i));
      } catch (const std::exception& e) {
        outcomes[i] = TrialOutcome{};
        outcomes[i].error = e.what();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<Tally> tallies;
  tallies.push_back({"trial-completed"});
  for (const auto& tag : plan.tags) tallies.push_back({tag});
  auto tally = [&](const std::string& tag) -> Tally& {
    for (auto& t : tallies)
      if (t.tag == tag) return t;
    tallies.push_back({tag});
    return tallies.back();
  };
  auto record = [&](const std::string& tag, bool passed, json trial, std::uint64_t trial_seed,
                    const std::string& detail) {
    auto& t = tally(tag);
    ++t.checked;
    if (!passed) {
      t.passed = false;
      ++t.failed;
      t.failures.push_back({{"trial", trial}, {"seed", trial_seed}, {"detail", detail}});
    }
  };

  json details = json::array();
  std::ostringstream csv;
  csv << "trial,procedure,round,beta_t,p_t,draws_labeled,draws_unlabeled,robust_risk,natural_error\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const auto trial_seed = derive_seed(seed, i);
    record("trial-completed", !o.error, i, trial_seed, o.error.value_or(""));
    for (const auto& c : o.checks) record(c.tag, c.passed, i, trial_seed, c.detail);
    json d = o.detail;
    d["trial"] = i;
    d["seed"] = trial_seed;
    if (o.error) d["error"] = *o.error;
    details.push_back(std::move(d));
    for (const auto& row : o.rows) {
      csv << i << ',' << procedure;
      for (const auto& c : row) csv << ',' << c;
      csv << '\n';
    }
  }
  json summary = json::object();
  for (const auto& a : plan.aggregate(outcomes, summary)) record(a.tag, a.passed, nullptr, seed, a.detail);

  Report report;
  report.passed = true;
  json assertions = json::array();
  for (const auto& t : tallies) {
    report.passed = report.passed && t.passed;
    assertions.push_back(
        {{"tag", t.tag}, {"passed", t.passed}, {"checked", t.checked}, {"failed", t.failed}, {"failures", t.failures}});
  }
  summary["trials"] = options.trials;
  summary["errors"] = tally("trial-completed").failed;
  report.document = {{"report_version", kReportVersion},
                     {"scenario", s.source.is_null() ? scenario_to_json(s) : s.source},
                     {"procedure", procedure},
                     {"trials", options.trials},
                     {"seed", seed},
                     {"trials_detail", std::move(details)},
                     {"assertions", std::move(assertions)},
                     {"summary", std::move(summary)},
                     {"passed", report.passed}};
  report.csv = csv.str();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<std::string> diff_reports(const json& a, const json& b) {
  std::vector<std::string> out;
  for (const auto& op : json::diff(a, b)) out.push_back(op["op"].get<std::string>() + " " + op["path"].get<std::string>());
  return out;
}

}  // namespace roboost
