#include <doctest.h>

#include <cmath>
#include <memory>

#include <roboost/boost.hpp>
#include <roboost/errors.hpp>

#include "oracles.hpp"
#include "worlds.hpp"

using namespace roboost;

namespace {

ScriptOptions script(double beta, double eps_prime) { return {beta, eps_prime, ScriptMode::exact_beta, 0.0, 0.05}; }

// Claims beta = 0.9 but returns an alternating labeling, robust nowhere.
Learner liar(std::size_t n) {
  return Learner("liar", BarelyRobustTerms{0.9, 0.1, 0.1}, 3, [n](ExampleSource& src, Rng&) {
    drain(src, 3);
    Labeling h(std::vector<Label>(n, -1));
    for (Point x = 0; x < n; x += 2) h[x] = 1;
    return h;
  });
}

}  // namespace

TEST_CASE("round and sample counts") {
  CHECK(roboost_rounds(0.5, 0.25) == 5);
  CHECK(roboost_rounds(1.0, 0.5) == 2);
  CHECK(roboost_rounds(1.0, 0.99) == 1);
  CHECK(roboost_sample_size(3, 5, 0.1) == ceil_count(4 * std::log(100.0)));
  CHECK(roboost_sample_size(500, 5, 0.1) == 500);
  CHECK(rejection_budget(0.1) == 40);
  CHECK(alpha_rounds(20) == 145);
  CHECK(alpha_rounds(1) == 1);
  CHECK(kAlpha == 0.125);
  CHECK(roboost_rounds(0.5, 1.0 / 3) == 4);
  CHECK(alpha_retry_limit(145, 0.05) == ceil_count(std::log(2 * 145 / 0.05) / std::log(3.0)));
  CHECK_THROWS_AS(roboost_rounds(0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(roboost_rounds(0.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(alpha_rounds(0), InvalidArgument);
  CHECK_THROWS_AS(rejection_budget(0.0), InvalidArgument);
}

TEST_CASE("rejection sampling") {
  std::vector<double> d(10, 0.1);
  Labeling c = Labeling::constant(10, 1);
  SamplingOracle o(Distribution(d), c, 5);
  PointSet region(10);
  region.insert(3);
  region.insert(4);
  auto r = rejection_sampling(region, 6, o, 1000);
  CHECK_FALSE(r.aborted);
  CHECK(r.sample.size() == 6);
  for (const auto& e : r.sample) CHECK(region.contains(e.x));
  CHECK(r.draws == o.drawn());

  SamplingOracle o2(Distribution(d), c, 5);
  auto none = rejection_sampling(PointSet(10), 2, o2, 7);
  CHECK(none.aborted);
  CHECK(none.sample.empty());
  CHECK(none.draws == 7);

  SamplingOracle o3(Distribution(d), c, 5);
  auto all = rejection_sampling(PointSet::full(10), 4, o3, 1);
  CHECK(all.draws == 4);

  SamplingOracle capped(Distribution(d), c, 5, 3);
  CHECK_THROWS_AS(rejection_sampling(PointSet::full(10), 4, capped, 10), BudgetExhausted);
}

TEST_CASE("property: residual contraction and oracle residuals on block worlds") {
  Rng rng(59);
  for (int trial = 0; trial < 60; ++trial) {
    auto w = worlds::block_world(64, rng);
    const double beta = std::vector<double>{0.1, 0.25, 0.5}[rng.below(3)];
    const double eps = 0.1;
    auto a = scripted_oracle_learner(w.u, script(beta, beta * eps / 2), 5);
    SamplingOracle o(w.d, w.c, rng.next_u64());
    auto r = beta_roboost(o, a, {beta, eps, 0.05}, w.u, {{}, rng.next_u64(), std::nullopt});
    CHECK(r.run.planned_rounds == roboost_rounds(beta, eps));
    CHECK(r.run.rounds.size() <= r.run.planned_rounds);
    CHECK_FALSE(r.run.flagged());
    double prev = 1.0;
    std::vector<oracle::Labels> hs;
    std::vector<oracle::Sets> us;
    for (std::size_t t = 0; t < r.run.rounds.size(); ++t) {
      const auto& rec = r.run.rounds[t];
      REQUIRE(rec.residual.has_value());
      CHECK(*rec.beta_t >= beta - 1e-12);
      CHECK(*rec.residual <= (1 - *rec.beta_t) * prev + 1e-12);
      prev = *rec.residual;
      hs.push_back(worlds::labels(r.cascade.stages()[t].hypothesis()));
      us.push_back(worlds::sets(*w.u));
    }
    // oracle residual: natural points where every stage can be forced to abstain
    const auto res = residual_region(r.cascade, 64);
    for (Point x = 0; x < 64; ++x) {
      bool all = true;
      for (std::size_t t = 0; t < hs.size(); ++t) {
        bool forced = false;
        for (int z : us[t][x]) forced = forced || !oracle::selective(hs[t], us[t], z).has_value();
        all = all && forced;
      }
      CHECK(res.contains(x) == all);
    }
    CHECK(w.d.measure(res) == doctest::Approx(prev).epsilon(1e-12));
    if (r.run.rounds.size() == r.run.planned_rounds)
      CHECK(robust_risk(r.cascade, w.d, w.c, *w.u) <= eps + 1e-12);
  }
}

TEST_CASE("beta one stops after a single round") {
  Rng rng(61);
  auto w = worlds::block_world(64, rng);
  auto a = scripted_oracle_learner(w.u, script(1.0, 0.0), 4);
  SamplingOracle o(w.d, w.c, 3);
  auto r = beta_roboost(o, a, {1.0, 0.1, 0.05}, w.u);
  CHECK(r.run.planned_rounds == 3);
  CHECK(r.run.rounds.size() == 1);
  CHECK(r.run.early_stop);
  CHECK(*r.run.rounds[0].residual == 0.0);
  CHECK(robust_risk(r.cascade, w.d, w.c, *w.u) == 0.0);
}

TEST_CASE("contract violations are flagged, not thrown") {
  auto w = worlds::threshold_world();
  SamplingOracle o(w.d, w.c, 4);
  auto r = beta_roboost(o, liar(16), {0.9, 0.1, 0.1}, w.u);
  CHECK(r.run.flagged());
  CHECK(r.run.rounds.front().contract_violation);
}

TEST_CASE("a residual without support stops the run early") {
  // once the residual holds no support, the run has to stop before round 50
  Rng rng(79);
  auto w = worlds::block_world(64, rng);
  auto a = scripted_oracle_learner(w.u, script(0.3, 0.0), 2);
  SamplingOracle o(w.d, w.c, 8);
  auto r = beta_roboost(o, a, {0.3, 0.1, 0.1}, w.u, {{}, 1, 50});
  CHECK(r.run.rounds.size() < 50);
  CHECK(r.run.early_stop);
  CHECK(r.run.labeled_draws == o.drawn());
}

TEST_CASE("beta-RoBoost is deterministic in its seeds") {
  Rng rng(83);
  auto w = worlds::block_world(64, rng);
  auto a = scripted_oracle_learner(w.u, script(0.3, 0.01), 4);
  auto once = [&] {
    SamplingOracle o(w.d, w.c, 17);
    return beta_roboost(o, a, {0.3, 0.1, 0.1}, w.u, {{}, 23, std::nullopt}).cascade.tabulate();
  };
  CHECK(once() == once());
}

TEST_CASE("URoBoost uses one labeled batch") {
  Rng rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    auto w = worlds::block_world(64, rng);
    ScriptOptions opts{0.5, 0.0125, ScriptMode::noise_tolerant, 0.0125, 0.025};
    auto a = scripted_oracle_learner(w.u, opts, 12);
    SamplingOracle labeled(w.d, w.c, rng.next_u64());
    SamplingOracle unlabeled(w.d, std::nullopt, rng.next_u64());
    auto r = beta_uroboost(labeled, unlabeled, a, {0.5, 0.1, 0.05}, w.u, {{}, rng.next_u64(), std::nullopt});
    CHECK(r.boost.run.procedure == "uroboost");
    CHECK(r.boost.run.labeled_draws == 12);
    CHECK(labeled.drawn() == 12);
    CHECK(r.boost.run.unlabeled_draws == unlabeled.drawn());
    CHECK(r.boost.run.unlabeled_draws > 0);
    CHECK(r.boost.run.sample_size == roboost_sample_size(12, roboost_rounds(0.5, 0.1), 0.025));
    CHECK(r.boost.run.oracle_calls == r.boost.run.rounds.size() + 1);
    CHECK(robust_risk(r.boost.cascade, w.d, w.c, *w.u) <= 0.1 + 1e-12);
  }
  SamplingOracle unlabeled(Distribution::uniform(4), std::nullopt, 1);
  CHECK_THROWS_AS(unlabeled.next(), InvalidArgument);
}

TEST_CASE("granular boosting halves the radius") {
  auto w = worlds::granular_world();
  LearnerFamily family = [](RelationPtr u) { return scripted_oracle_learner(u, script(0.3, 0.0), 8); };
  SamplingOracle o(w.d, w.c, 71);
  auto r = granular_boost(o, family, w.space, path_metric(), {4.0, 3, 0.1, 1}, {{}, 3, std::nullopt});
  REQUIRE(r.radii.size() == 3);
  CHECK(r.radii[0] == 4.0);
  CHECK(r.radii[1] == 2.0);
  CHECK(r.radii[2] == 1.0);
  CHECK(r.run.sample_size == 8);
  for (std::size_t t = 0; t < r.run.rounds.size(); ++t) {
    CHECK(*r.run.rounds[t].radius == r.radii[t]);
    CHECK(r.cascade.stages()[t].relation() == make_metric_ball(w.space, path_metric(), r.radii[t]));
    CHECK(r.robust_regions[t].is_subset_of(r.radius_robust_regions[t]));
  }
  REQUIRE(r.coverage.has_value());
  CHECK(*r.coverage >= 0.3 - 1e-12);
  CHECK(w.d.measure(r.robust_regions[0]) >= 0.3 - 1e-12);
  CHECK_THROWS_AS(granular_boost(o, family, w.space, path_metric(), {0.0, 3, 0.1, 1}), InvalidArgument);
  CHECK_THROWS_AS(granular_boost(o, family, w.space, path_metric(), {4.0, 0, 0.1, 1}), InvalidArgument);
}

TEST_CASE("weighted sample oracle") {
  LabeledSample s{{0, -1}, {3, 1}, {3, 1}};
  std::vector<double> w{0.5, 0.25, 0.25};
  WeightedSampleOracle o(s, w, 5, 9);
  auto view = o.exact();
  REQUIRE(view.has_value());
  CHECK(view->distribution[0] == 0.5);
  CHECK(view->distribution[3] == 0.5);
  CHECK(view->labeler[0] == -1);
  CHECK(view->labeler[3] == 1);
  int zeros = 0;
  for (int i = 0; i < 4000; ++i) zeros += o.next().x == 0 ? 1 : 0;
  CHECK(std::abs(zeros / 4000.0 - 0.5) < 0.05);
  LabeledSample conflicting{{0, -1}, {0, 1}};
  std::vector<double> half{0.5, 0.5};
  CHECK_FALSE(WeightedSampleOracle(conflicting, half, 2, 1).exact().has_value());
  CHECK_THROWS_AS(WeightedSampleOracle(s, half, 5, 1), InvalidArgument);
}

TEST_CASE("alpha-Boost reaches zero empirical robust risk") {
  auto w = worlds::threshold_world();
  auto weak = erm_learner(threshold_class(16), w.u, 10, {1.0 / 3, 1.0 / 3});
  SamplingOracle o(w.d, w.c, 5);
  auto s = drain(o, 20);
  auto r = alpha_boost(s, weak, w.u, 0.05, {7, std::nullopt, w.c});
  CHECK(r.run.rounds.size() == alpha_rounds(20));
  CHECK(r.majority.members().size() == alpha_rounds(20));
  for (const auto& rec : r.run.rounds) {
    CHECK(*rec.weighted_risk <= 1.0 / 3 + 1e-9);
    CHECK(*rec.weight_sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.attempts <= alpha_retry_limit(alpha_rounds(20), 0.05));
  }
  CHECK(r.min_margin > 0.5);
  CHECK(r.empirical_robust_risk == 0.0);
  CHECK_THROWS_AS(alpha_boost({}, weak, w.u, 0.05), InvalidArgument);
}

TEST_CASE("alpha-Boost reports a weak learner that never succeeds") {
  auto w = worlds::threshold_world();
  Learner bad("bad", StrongRobustTerms{1.0 / 3, 1.0 / 3}, 1, [](ExampleSource&, Rng&) {
    Labeling h(std::vector<Label>(16, 1));
    for (Point x = 0; x < 16; x += 2) h[x] = -1;
    return h;
  });
  LabeledSample s{{0, -1}, {15, 1}};
  CHECK_THROWS_AS(alpha_boost(s, bad, w.u, 0.1), WeakLearnerFailure);
}

TEST_CASE("two-layer boosting") {
  Rng rng(73);
  auto w = worlds::block_world(64, rng);
  auto a = scripted_oracle_learner(w.u, {0.5, 0.05, ScriptMode::exact_beta, 0.0, 0.04}, 4);
  SamplingOracle o(w.d, w.c, 11);
  auto r = two_layer_boost(o, a, 16, w.u, 0.05, {13, std::nullopt, std::nullopt});
  CHECK(r.sample.size() == 16);
  CHECK(r.outer.run.procedure == "two_layer");
  CHECK(r.outer.empirical_robust_risk == 0.0);
  CHECK(r.outer.min_margin > 0.5);
  CHECK(robust_risk(r.outer.majority.tabulate(), w.d, w.c, *w.u) <= 0.1 + 1e-12);
  auto weak = roboost_weak_learner(a, w.u);
  const auto& inner = std::get<StrongRobustTerms>(weak.terms());
  CHECK(inner.epsilon == doctest::Approx(1.0 / 3));
  CHECK(inner.delta == doctest::Approx(1.0 / 3));
  auto loose = scripted_oracle_learner(w.u, {0.5, 0.2, ScriptMode::exact_beta, 0.0, 0.04}, 4);
  CHECK_THROWS_AS(roboost_weak_learner(loose, w.u), InvalidArgument);
  auto strong = erm_learner(threshold_class(64), w.u, 4, {0.1, 0.1});
  CHECK_THROWS_AS(roboost_weak_learner(strong, w.u), InvalidArgument);
}

TEST_CASE("granular boosting with beta one skips later levels") {
  Rng rng(89);
  auto w = worlds::block_world(64, rng);
  LearnerFamily family = [](RelationPtr u) { return scripted_oracle_learner(u, script(1.0, 0.0), 3); };
  SamplingOracle o(w.d, w.c, 97);
  auto r = granular_boost(o, family, w.space, path_metric(), {1.0, 3, 0.1, 1});
  CHECK(r.run.rounds.size() == 1);
  CHECK(r.run.early_stop);
  CHECK(*r.coverage == doctest::Approx(1.0));
}

TEST_CASE("property: accepted points lie where every stage can be forced to abstain") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.below(30);
    auto u = share(worlds::random_relation(n, 0.1, true, rng));
    CascadePredictor cascade;
    std::vector<oracle::Labels> hs;
    for (std::size_t t = 0, k = 1 + rng.below(3); t < k; ++t) {
      auto h = worlds::random_labeling(n, rng);
      hs.push_back(worlds::labels(h));
      cascade.add_stage(h, u);
    }
    const auto sets = worlds::sets(*u);
    const auto region = residual_region(cascade, n);
    SamplingOracle o(worlds::random_distribution(n, 0.8, rng), Labeling::constant(n, 1), rng.next_u64());
    auto r = rejection_sampling(region, 5, o, 50);
    for (const auto& e : r.sample)
      for (const auto& h : hs) {
        bool forced = false;
        for (int z : sets[e.x]) forced = forced || !oracle::selective(h, sets, z).has_value();
        CHECK(forced);
      }
  }
}

TEST_CASE("URoBoost with exact pseudo-labels reduces to beta-RoBoost") {
  Rng rng(103);
  auto w = worlds::block_world(64, rng);
  auto scripted = scripted_oracle_learner(w.u, script(0.5, 0.0), 6);
  auto calls = std::make_shared<int>(0);
  Learner a("exact_first", scripted.terms(), 6, [=, c = w.c](ExampleSource& src, Rng&) -> Hypothesis {
    if ((*calls)++ > 0) return scripted.invoke(src, 0);
    drain(src, 6);
    return c;
  });
  SamplingOracle labeled(w.d, w.c, 1);
  SamplingOracle unlabeled(w.d, std::nullopt, 2);
  auto u = beta_uroboost(labeled, unlabeled, a, {0.5, 0.1, 0.1}, w.u, {{}, 3, std::nullopt});
  CHECK(u.pseudo_labeler == w.c);

  SamplingOracle direct(w.d, w.c, 2);
  auto r = beta_roboost(direct, scripted, {0.5, 0.1, 0.05}, w.u, {{}, 3, std::nullopt});
  CHECK(u.boost.cascade.tabulate() == r.cascade.tabulate());
  CHECK(u.boost.run.unlabeled_draws == r.run.labeled_draws);
  CHECK(u.boost.run.rounds.size() == r.run.rounds.size());
}
