#include "roboost/boost.hpp"

#include <algorithm>
#include <cmath>

#include "roboost/errors.hpp"

namespace roboost {

namespace {

void require_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw InvalidArgument(std::string(name) + " must lie in (0, 1)");
}

std::optional<double> promised_beta(const Learner& a) {
  if (const auto* t = std::get_if<BarelyRobustTerms>(&a.terms())) return t->beta;
  if (const auto* t = std::get_if<NoiseTolerantTerms>(&a.terms())) return t->beta;
  return std::nullopt;
}

struct Stage {
  const Learner* learner;
  RelationPtr relation;
  std::optional<double> radius;
};

// The round loop shared by beta_roboost and granular_boost. Draw counts land
// in run.labeled_draws; callers relabel them where needed.
void run_rounds(ExampleSource& oracle, std::size_t rounds, std::size_t m, std::size_t budget,
                const std::function<Stage(std::size_t)>& stage_for, std::uint64_t seed, CascadePredictor& cascade,
                BoostRun& run) {
  const auto exact = oracle.exact();
  std::optional<PointSet> residual;
  for (std::size_t t = 1; t <= rounds; ++t) {
    const Stage stage = stage_for(t);
    const auto n = stage.relation->point_count();
    if (!residual) residual = PointSet::full(n);
    if (residual->empty()) {
      run.early_stop = true;
      break;
    }

    auto rs = rejection_sampling(*residual, m, oracle, budget);
    run.labeled_draws += rs.draws;
    if (rs.aborted) {
      run.early_stop = true;
      break;
    }

    std::optional<ExactView> view;
    if (exact) view = ExactView{condition(exact->distribution, *residual), exact->labeler};
    ReplayOracle replay(std::move(rs.sample), view);
    auto h = stage.learner->invoke(replay, derive_seed(seed, t));
    ++run.oracle_calls;

    SelectiveClassifier selective(h, stage.relation);
    *residual &= selective.forced_abstain_region();
    cascade.add_stage(std::move(selective));

    RoundRecord rec;
    rec.t = t;
    rec.draws = rs.draws;
    rec.sample_size = m;
    rec.radius = stage.radius;
    if (view) {
      const auto v = compose_inverse(*stage.relation);
      rec.beta_t = view->distribution.measure(robust_region(h, v));
      rec.natural_error = natural_error(h, view->distribution, view->labeler);
      rec.residual = exact->distribution.measure(*residual);
      if (auto beta = promised_beta(*stage.learner))
        rec.contract_violation = *rec.beta_t < *beta - kMassTolerance;
    }
    run.rounds.push_back(rec);
  }
}

}  // namespace

bool BoostRun::flagged() const {
  return std::any_of(rounds.begin(), rounds.end(), [](const RoundRecord& r) { return r.contract_violation; });
}

std::size_t roboost_rounds(double beta, double epsilon) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in (0, 1]");
  require_open_unit(epsilon, "epsilon");
  return std::max<std::size_t>(1, ceil_count(std::log(2.0 / epsilon) / beta));
}

std::size_t roboost_sample_size(std::size_t m_a, std::size_t rounds, double delta) {
  require_open_unit(delta, "delta");
  return std::max(m_a, ceil_count(4.0 * std::log(2.0 * static_cast<double>(rounds) / delta)));
}

std::size_t rejection_budget(double epsilon) {
  require_open_unit(epsilon, "epsilon");
  return ceil_count(4.0 / epsilon);
}

RejectionResult rejection_sampling(const PointSet& region, std::size_t m, ExampleSource& oracle,
                                   std::size_t per_point_budget) {
  RejectionResult out;
  out.sample.reserve(m);
  while (out.sample.size() < m) {
    bool accepted = false;
    for (std::size_t tries = 0; tries < per_point_budget; ++tries) {
      auto e = oracle.next();
      ++out.draws;
      if (region.contains(e.x)) {
        out.sample.push_back(e);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.sample.clear();
      out.aborted = true;
      break;
    }
  }
  return out;
}

PointSet residual_region(const CascadePredictor& cascade, std::size_t point_count) {
  return cascade.all_abstain_region(point_count);
}

RoBoostResult beta_roboost(ExampleSource& oracle, const Learner& a, RoBoostParams params, RelationPtr u,
                           RoBoostOptions options) {
  require_open_unit(params.delta, "delta");
  const auto rounds = options.rounds.value_or(roboost_rounds(params.beta, params.epsilon));
  const auto m = roboost_sample_size(a.sample_size(), rounds, params.delta);
  const auto budget = rejection_budget(params.epsilon);

  RoBoostResult result{CascadePredictor(options.fallback), {}};
  auto& run = result.run;
  run.procedure = "roboost";
  run.planned_rounds = rounds;
  run.sample_size = m;
  run.per_point_budget = budget;
  run.seed = options.seed;
  run_rounds(
      oracle, rounds, m, budget, [&](std::size_t) { return Stage{&a, u, std::nullopt}; }, options.seed,
      result.cascade, run);
  if (result.cascade.size() == 0) throw EmptyEvent("no round accepted a sample");
  return result;
}

std::size_t alpha_rounds(std::size_t sample_count) {
  if (sample_count == 0) throw InvalidArgument("alpha-Boost needs a nonempty sample");
  return 1 + ceil_count(48.0 * std::log(static_cast<double>(sample_count)));
}

std::size_t alpha_retry_limit(std::size_t rounds, double delta) {
  require_open_unit(delta, "delta");
  return std::max<std::size_t>(1, ceil_count(std::log(2.0 * static_cast<double>(rounds) / delta) / std::log(3.0)));
}

WeightedSampleOracle::WeightedSampleOracle(const LabeledSample& s, std::span<const double> weights,
                                           std::size_t point_count, std::uint64_t seed,
                                           const std::optional<Labeling>& exact_labeler)
    : s_(s),
      indices_(Distribution::from_weights(std::vector<double>(weights.begin(), weights.end())), std::nullopt, seed) {
  if (weights.size() != s.size()) throw InvalidArgument("one weight per sample point is required");
  std::vector<double> mass(point_count, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) mass.at(s[i].x) += indices_.distribution()[i];
  Labeling labeler = exact_labeler ? *exact_labeler : Labeling::constant(point_count, s.front().y);
  bool consistent = true;
  if (!exact_labeler) {
    std::vector<bool> seen(point_count, false);
    for (const auto& [x, y] : s) {
      if (seen[x] && labeler[x] != y) consistent = false;
      labeler[x] = y;
      seen[x] = true;
    }
  }
  if (consistent) view_ = ExactView{Distribution::from_weights(std::move(mass)), std::move(labeler)};
}

LabeledExample WeightedSampleOracle::next() { return s_[indices_.draw().x]; }

AlphaResult alpha_boost(const LabeledSample& s, const Learner& weak, RelationPtr u, double delta,
                        AlphaOptions options) {
  if (s.empty()) throw InvalidArgument("alpha-Boost needs a nonempty sample");
  const auto rounds = options.rounds.value_or(alpha_rounds(s.size()));
  const auto retries = alpha_retry_limit(rounds, delta);
  const auto n = u->point_count();
  const double shrink = std::exp(-2.0 * kAlpha);

  BoostRun run;
  run.procedure = "alpha";
  run.planned_rounds = rounds;
  run.sample_size = weak.sample_size();
  run.labeled_draws = s.size();
  run.seed = options.seed;

  std::vector<double> w(s.size(), 1.0 / static_cast<double>(s.size()));
  std::vector<Labeling> members;
  members.reserve(rounds);
  for (std::size_t t = 1; t <= rounds; ++t) {
    const auto round_seed = derive_seed(options.seed, t);
    std::optional<Hypothesis> accepted;
    RoundRecord rec;
    rec.t = t;
    for (std::size_t attempt = 1; attempt <= retries && !accepted; ++attempt) {
      WeightedSampleOracle oracle(s, w, n, derive_seed(round_seed, 2 * attempt), options.exact_labeler);
      auto h = weak.invoke(oracle, derive_seed(round_seed, 2 * attempt + 1));
      ++run.oracle_calls;
      rec.draws += oracle.drawn();
      rec.attempts = attempt;
      const double risk = weighted_robust_risk(h, s, w, *u);
      rec.weighted_risk = risk;
      if (risk <= 1.0 / 3.0 + kMassTolerance) accepted = std::move(h);
    }
    if (!accepted) throw WeakLearnerFailure(t, retries);

    for (std::size_t i = 0; i < s.size(); ++i)
      if (robustly_correct(*accepted, *u, s[i].x, s[i].y)) w[i] *= shrink;
    const double z = stable_sum(w);
    for (auto& wi : w) wi /= z;
    rec.weight_sum = stable_sum(w);
    rec.sample_size = weak.sample_size();
    run.rounds.push_back(rec);
    members.push_back(std::move(*accepted));
  }

  AlphaResult result{MajorityPredictor(u->space(), members), std::move(run), {}, 1.0, 0.0};
  result.margins.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t good = 0;
    for (const auto& h : members)
      if (robustly_correct(h, *u, s[i].x, s[i].y)) ++good;
    result.margins[i] = static_cast<double>(good) / static_cast<double>(members.size());
  }
  result.min_margin = *std::min_element(result.margins.begin(), result.margins.end());
  result.empirical_robust_risk = empirical_robust_risk(result.majority.tabulate(), s, *u);
  return result;
}

Learner roboost_weak_learner(Learner a, RelationPtr u, Fallback fallback) {
  const auto* t = std::get_if<BarelyRobustTerms>(&a.terms());
  if (!t) throw InvalidArgument("the two-layer scheme needs a barely robust learner");
  const double beta = t->beta;
  const double tol = 1e-12;
  if (t->epsilon > beta / 6.0 + tol || t->delta > beta / (6.0 * std::log(6.0)) + tol)
    throw InvalidArgument("the two-layer scheme needs a (beta, beta/6, beta/(6 ln 6)) learner");
  const double eps0 = 1.0 / 3.0;
  const double delta0 = 1.0 / 3.0;
  const auto rounds = roboost_rounds(beta, eps0);
  const auto m = roboost_sample_size(a.sample_size(), rounds, delta0);
  const auto budget = rounds * m * rejection_budget(eps0);
  auto body = [a = std::move(a), u, fallback, beta, eps0, delta0, rounds](ExampleSource& src, Rng& rng) {
    RoBoostOptions options{fallback, rng.next_u64(), rounds};
    return beta_roboost(src, a, {beta, eps0, delta0}, u, options).cascade.tabulate();
  };
  return Learner("roboost_weak", StrongRobustTerms{eps0, delta0}, budget, std::move(body));
}

TwoLayerResult two_layer_boost(ExampleSource& oracle, const Learner& a, std::size_t sample_count, RelationPtr u,
                               double delta, AlphaOptions options) {
  auto weak = roboost_weak_learner(a, u);
  auto s = drain(oracle, sample_count);
  if (s.size() != sample_count) throw BudgetExhausted(s.size(), sample_count);
  if (!options.exact_labeler)
    if (auto view = oracle.exact()) options.exact_labeler = view->labeler;
  auto outer = alpha_boost(s, weak, u, delta, std::move(options));
  outer.run.procedure = "two_layer";
  return {std::move(outer), std::move(s)};
}

URoBoostResult beta_uroboost(SamplingOracle& labeled, SamplingOracle& unlabeled, const Learner& a,
                             RoBoostParams params, RelationPtr u, RoBoostOptions options) {
  const auto labeled_before = labeled.drawn();
  auto pseudo = a.invoke(labeled, derive_seed(options.seed, 0));
  const auto labeled_used = labeled.drawn() - labeled_before;

  PseudoLabelOracle pseudo_oracle(unlabeled, pseudo);
  // Halving delta gives m = max(m_A, 4 ln(4T/delta)) for the inner run.
  RoBoostParams inner{params.beta, params.epsilon, params.delta / 2.0};
  auto boost = beta_roboost(pseudo_oracle, a, inner, u, options);
  boost.run.procedure = "uroboost";
  boost.run.unlabeled_draws = boost.run.labeled_draws;
  boost.run.labeled_draws = labeled_used;
  boost.run.oracle_calls += 1;
  return {std::move(pseudo), std::move(boost)};
}

GranularResult granular_boost(ExampleSource& oracle, const LearnerFamily& family, const InstanceSpace& space,
                              const Metric& metric, GranularParams params, RoBoostOptions options) {
  if (!(params.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (params.levels == 0) throw InvalidArgument("granular boosting needs at least one level");
  const auto budget = rejection_budget(params.epsilon);

  GranularResult result{CascadePredictor(options.fallback), {}, {}, {}, {}, std::nullopt};
  std::vector<RelationPtr> relations;
  std::vector<Learner> learners;
  learners.reserve(params.levels);
  for (std::size_t t = 0; t < params.levels; ++t) {
    const double radius = params.gamma / std::ldexp(1.0, static_cast<int>(t));
    result.radii.push_back(radius);
    relations.push_back(share(make_metric_ball(space, metric, radius)));
    learners.push_back(family(relations.back()));
  }
  auto m = params.sample_size;
  for (const auto& l : learners) m = std::max(m, l.sample_size());

  auto& run = result.run;
  run.procedure = "granular";
  run.planned_rounds = params.levels;
  run.sample_size = m;
  run.per_point_budget = budget;
  run.seed = options.seed;
  run_rounds(
      oracle, params.levels, m, budget,
      [&](std::size_t t) { return Stage{&learners[t - 1], relations[t - 1], result.radii[t - 1]}; }, options.seed,
      result.cascade, run);
  if (result.cascade.size() == 0) throw EmptyEvent("no round accepted a sample");

  PointSet covered(space.point_count());
  for (std::size_t t = 0; t < result.cascade.size(); ++t) {
    const auto& stage = result.cascade.stages()[t];
    result.robust_regions.push_back(robust_region(stage.hypothesis(), compose_inverse(stage.relation())));
    result.radius_robust_regions.push_back(robust_region(stage.hypothesis(), stage.relation()));
    covered |= result.robust_regions.back();
  }
  if (auto view = oracle.exact()) result.coverage = view->distribution.measure(covered);
  return result;
}

}  // namespace roboost
