// One PASS/FAIL line per acceptance criterion. Exit status 1 when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <roboost/boost.hpp>
#include <roboost/errors.hpp>
#include <roboost/harness.hpp>
#include <roboost/learners.hpp>
#include <roboost/scenario.hpp>

#include "oracles.hpp"
#include "worlds.hpp"

using namespace roboost;

namespace {

struct Verdict {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && passed) detail = what;
    passed = passed && ok;
  }
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Verdict()> body;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Verdict perturbation_algebra() {
  Verdict v;
  const auto binary = [](std::size_t n) { return InstanceSpace::binary(n); };
  std::size_t checked = 0;
  for (std::size_t n : {1, 2, 7, 33, 64})
    for (double g : {0.0, 1.0, 2.0, 3.0, 5.0, 16.0}) {
      const auto space = binary(n);
      v.require(compose_inverse(make_metric_ball(space, path_metric(), g)) ==
                    make_metric_ball(space, path_metric(), 2 * g),
                "path n=" + std::to_string(n) + " gamma=" + fmt(g));
      ++checked;
    }
  for (std::size_t width : {1, 3, 8})
    for (std::size_t rows : {1, 5, 8}) {
      const auto space = binary(width * rows);
      for (double g : {0.0, 1.0, 2.0, 3.0}) {
        for (auto metric : {grid_l1_metric(width), grid_linf_metric(width)}) {
          v.require(compose_inverse(make_metric_ball(space, metric, g)) == make_metric_ball(space, metric, 2 * g),
                    "grid " + std::to_string(width) + "x" + std::to_string(rows) + " gamma=" + fmt(g));
          ++checked;
        }
      }
    }
  if (v.passed) v.detail = std::to_string(checked) + " worlds";
  return v;
}

Verdict selective_guarantees() {
  Verdict v;
  Rng rng(1001);
  std::size_t points = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(63);
    auto u = worlds::random_relation(n, 0.03 + 0.2 * rng.uniform(), rng.coin(), rng);
    auto h = worlds::random_labeling(n, rng);
    auto d = worlds::random_distribution(n, 0.5, rng);
    const auto sets = worlds::sets(u);
    const auto labels = worlds::labels(h);
    const auto shared = oracle::shared_perturbation(sets);
    const auto rob = oracle::robust_region(labels, shared);
    double forced = 0.0;
    for (Point x = 0; x < n; ++x) {
      ++points;
      bool can_abstain = false;
      for (Point z : u(x)) {
        const auto g = selective_predict(h, u, z);
        v.require(g.abstains() || g.label() == h[x], "a stage predicted against h(x)");
        if (rob.count(static_cast<int>(x))) v.require(!g.abstains() && g.label() == h[x], "robust point abstained");
        can_abstain = can_abstain || g.abstains();
      }
      if (can_abstain) forced += d[x];
    }
    const double rob_mass = oracle::robustness_mass(labels, worlds::masses(d), shared);
    v.require(forced <= 1.0 - rob_mass + 1e-12, "abstention mass above 1 - D(Rob)");
  }
  if (v.passed) v.detail = "1000 instances, " + std::to_string(points) + " points";
  return v;
}

Verdict roboost_bounds() {
  Verdict v;
  const double delta = 0.05;
  const std::size_t trials = 200;
  std::size_t unflagged = 0;
  for (double beta : {0.1, 0.25, 0.5})
    for (double eps : {0.05, 0.1}) {
      std::size_t over = 0;
      for (std::size_t i = 0; i < trials; ++i) {
        const auto seed = derive_seed(static_cast<std::uint64_t>(beta * 1000 + eps * 100), i);
        Rng rng(seed);
        auto w = worlds::block_world(64, rng);
        auto a = scripted_oracle_learner(w.u, {beta, beta * eps / 2, ScriptMode::exact_beta, 0.0, delta}, 5);
        SamplingOracle o(w.d, w.c, derive_seed(seed, 0));
        auto r = beta_roboost(o, a, {beta, eps, delta}, w.u, {{}, derive_seed(seed, 1), std::nullopt});
        const double cap = 4.0 * static_cast<double>(r.run.planned_rounds * r.run.sample_size) / eps;
        over += static_cast<double>(r.run.labeled_draws) > cap ? 1 : 0;
        if (r.run.flagged()) continue;
        ++unflagged;
        const std::string where = "beta=" + fmt(beta) + " eps=" + fmt(eps) + " trial " + std::to_string(i);
        for (const auto& rec : r.run.rounds)
          v.require(*rec.residual <= std::pow(1 - beta, static_cast<double>(rec.t)) + 1e-12,
                    where + ": p_t above (1-beta)^t");
        const auto hs = r.cascade.stages();
        std::vector<oracle::Labels> labels;
        std::vector<oracle::Sets> sets;
        for (const auto& st : hs) {
          labels.push_back(worlds::labels(st.hypothesis()));
          sets.push_back(worlds::sets(st.relation()));
        }
        const auto cas = [&](int z) { return oracle::cascade(labels, sets, z, labels.front()[static_cast<std::size_t>(z)]); };
        const double risk = oracle::robust_risk(cas, worlds::masses(w.d), worlds::labels(w.c), worlds::sets(*w.u));
        v.require(std::abs(risk - robust_risk(r.cascade, w.d, w.c, *w.u)) <= 1e-12, where + ": oracle disagrees");
        v.require(risk <= eps + 1e-12, where + ": robust risk " + fmt(risk));
      }
      const double allowed = delta / 2 + 3 * std::sqrt(delta / trials);
      v.require(static_cast<double>(over) / trials <= allowed, "draw cap exceeded in " + std::to_string(over));
    }
  if (v.passed) v.detail = std::to_string(unflagged) + " unflagged trials of 1200";
  return v;
}

Verdict alpha_boost_margins() {
  Verdict v;
  auto w = worlds::threshold_world();
  auto weak = erm_learner(threshold_class(16), w.u, 10, {1.0 / 3, 1.0 / 3});
  std::size_t good = 0;
  std::size_t runs = 0;
  for (std::size_t size : {16, 32})
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SamplingOracle o(w.d, w.c, derive_seed(size, seed));
      auto s = drain(o, size);
      auto r = alpha_boost(s, weak, w.u, 0.05, {derive_seed(seed, 7), std::nullopt, w.c});
      const std::string where = "|S|=" + std::to_string(size) + " seed " + std::to_string(seed);
      v.require(r.run.rounds.size() == alpha_rounds(size), where + ": wrong round count");
      v.require(r.empirical_robust_risk == 0.0, where + ": nonzero empirical robust risk");
      v.require(r.min_margin > 0.5, where + ": margin " + fmt(r.min_margin));
      const auto maj = r.majority.tabulate();
      const double risk = oracle::robust_risk([&](int z) { return maj[static_cast<std::size_t>(z)]; },
                                              worlds::masses(w.d), worlds::labels(w.c), worlds::sets(*w.u));
      good += risk <= 0.1 + 1e-12 ? 1 : 0;
      ++runs;
    }
  v.require(good >= 0.95 * static_cast<double>(runs), "held-out risk <= 0.1 in only " + std::to_string(good));
  if (v.passed) v.detail = std::to_string(good) + "/" + std::to_string(runs) + " held-out risk <= 0.1";
  return v;
}

Verdict converter_guarantee() {
  Verdict v;
  auto w = worlds::threshold_world();
  const double eps = 0.05;
  const double delta = 0.05;
  const std::size_t trials = 200;
  auto converted = convert_strong_to_barely(erm_learner(threshold_class(16), w.u, 20, {eps, delta}), w.u);
  const auto shared = worlds::sets(compose_inverse(*w.u));
  std::size_t failures = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    SamplingOracle o(w.d, w.c, derive_seed(505, i));
    try {
      const auto g = converted.invoke(o, derive_seed(506, i));
      const double mass = oracle::robustness_mass(worlds::labels(g), worlds::masses(w.d), shared);
      const double nat = oracle::natural_error(worlds::labels(g), worlds::masses(w.d), worlds::labels(w.c));
      failures += (mass >= (1 - eps) / 2 - 1e-12 && nat <= 2 * eps + 1e-12) ? 0 : 1;
    } catch (const BudgetExhausted&) {
      ++failures;
    }
  }
  const double allowed = 2 * delta + 3 * std::sqrt(delta / trials);
  v.require(static_cast<double>(failures) / trials <= allowed, std::to_string(failures) + " failures");
  v.detail = std::to_string(failures) + "/" + std::to_string(trials) + " failures, allowed rate " + fmt(allowed);
  return v;
}

Verdict erm_loop() {
  Verdict v;
  auto s = load_scenario_file(std::string(ROBOOST_SOURCE_DIR) + "/scenarios/converted_erm_loop.json");
  auto report = run_scenario(s, "roboost", {100, std::nullopt, 0});
  std::size_t good = 0;
  for (const auto& t : report.document["trials_detail"])
    if (t.contains("robust_risk") && t["robust_risk"].get<double>() <= 0.1 + 1e-12) ++good;
  v.require(good >= 90, "robust risk <= 0.1 in only " + std::to_string(good) + " of 100");
  if (v.passed) v.detail = std::to_string(good) + "/100 seeds with robust risk <= 0.1";
  return v;
}

Verdict counterexample() {
  Verdict v;
  const std::size_t k = 8;
  std::vector<Label> y{1, -1, -1, 1, 1, -1, 1, -1};
  auto s = build_counterexample(k, y, std::vector<double>(k, 1.0 / k));
  const auto sets = worlds::sets(*s.relation);
  const auto masses = worlds::masses(s.distribution);
  const auto c = worlds::labels(s.concept_labels);

  double closed = 0.0;
  for (std::size_t n = 0; n < k; ++n) closed += (1.0 / k) * 0.5;
  double enumerated = 0.0;
  for (const auto& h : bitstring_class(k)) {
    const auto l = worlds::labels(h);
    enumerated += oracle::robust_risk([&](int z) { return l[static_cast<std::size_t>(z)]; }, masses, c, sets);
  }
  enumerated /= std::pow(2.0, static_cast<double>(k));
  v.require(std::abs(closed - 0.5) <= 1e-12 && std::abs(enumerated - 0.5) <= 1e-12,
            "expected risk " + fmt(enumerated));

  auto a = random_bitstring_learner(k);
  double total = 0.0;
  const std::size_t seeds = 10000;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    SamplingOracle o(s.distribution, s.concept_labels, derive_seed(seed, 0));
    const auto h = worlds::labels(a.invoke(o, derive_seed(seed, 1)));
    v.require(oracle::natural_error(h, masses, c) == 0.0, "nonzero natural error at seed " + std::to_string(seed));
    total += oracle::robust_risk([&](int z) { return h[static_cast<std::size_t>(z)]; }, masses, c, sets);
  }
  const double mean = total / seeds;
  v.require(std::abs(mean - 0.5) <= 0.02, "Monte-Carlo mean " + fmt(mean));

  for (std::size_t m = 1; m <= 3; ++m) {
    auto small = build_counterexample(m, std::vector<Label>(m, 1), std::vector<double>(m, 1.0 / m));
    const auto cls = bitstring_class(m);
    std::vector<oracle::Labels> tables;
    for (const auto& h : cls) tables.push_back(worlds::labels(h));
    const auto dim = robust_shattering_dim(cls, *small.relation, {m + 1, 24});
    v.require(dim == m, "shattering dimension " + std::to_string(dim) + " for k=" + std::to_string(m));
    v.require(oracle::shatters(tables, worlds::sets(*small.relation), static_cast<int>(m)) &&
                  !oracle::shatters(tables, worlds::sets(*small.relation), static_cast<int>(m + 1)),
              "oracle shattering disagrees for k=" + std::to_string(m));
  }
  if (v.passed) v.detail = "Monte-Carlo mean " + fmt(mean);
  return v;
}

Verdict uroboost() {
  Verdict v;
  const double beta = 0.5;
  const double eps = 0.1;
  const double delta = 0.05;
  const double eta = beta * eps / 4;
  Rng rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    auto w = worlds::block_world(64, rng);
    auto a = scripted_oracle_learner(w.u, {beta, eta, ScriptMode::noise_tolerant, eta, delta / 2}, 12);
    SamplingOracle labeled(w.d, w.c, rng.next_u64());
    SamplingOracle unlabeled(w.d, std::nullopt, rng.next_u64());
    auto r = beta_uroboost(labeled, unlabeled, a, {beta, eps, delta}, w.u, {{}, rng.next_u64(), std::nullopt});
    const std::string where = "trial " + std::to_string(trial);
    v.require(r.boost.run.labeled_draws == a.sample_size() && labeled.drawn() == a.sample_size(),
              where + ": more than one labeled batch");
    v.require(natural_error(r.pseudo_labeler, w.d, w.c) <= eta + 1e-12, where + ": pseudo-labeler above eta");
    if (r.boost.run.flagged()) continue;
    const double risk = robust_risk(r.boost.cascade, w.d, w.c, *w.u);
    v.require(risk <= eps + 1e-12, where + ": robust risk " + fmt(risk));
  }
  if (v.passed) v.detail = "100 trials";
  return v;
}

Verdict granular() {
  Verdict v;
  auto w = worlds::granular_world();
  const double beta = 0.3;
  LearnerFamily family = [beta](RelationPtr u) {
    return scripted_oracle_learner(u, {beta, 0.0, ScriptMode::exact_beta, 0.0, 0.05}, 8);
  };
  SamplingOracle o(w.d, w.c, 909);
  auto r = granular_boost(o, family, w.space, path_metric(), {4.0, 3, 0.1, 1}, {{}, 910, std::nullopt});
  const double target = 1 - std::pow(1 - beta, 3);
  v.require(r.coverage && *r.coverage >= target - 1e-12, "coverage " + fmt(r.coverage.value_or(-1)));
  std::string masses;
  for (std::size_t t = 0; t < r.robust_regions.size(); ++t)
    masses += (t ? ", " : "") + fmt(w.d.measure(r.robust_regions[t]));

  const auto& first = r.cascade.stages().front();
  const auto ball = make_metric_ball(w.space, path_metric(), 4.0);
  const auto cas = r.cascade.tabulate();
  for (Point x : r.robust_regions.front())
    for (Point z : ball(x))
      v.require(cas[z] == first.hypothesis()[x], "level-1 point " + std::to_string(x) + " not certified");
  if (v.passed) v.detail = "coverage " + fmt(*r.coverage) + " >= " + fmt(target) + "; per-level masses " + masses;
  return v;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "perturbation-algebra", 1, perturbation_algebra},
      {2, "selective-classifier-guarantees", 10, selective_guarantees},
      {3, "roboost-bounds", 60, roboost_bounds},
      {4, "alpha-boost", 120, alpha_boost_margins},
      {5, "strong-to-barely-converter", 30, converter_guarantee},
      {6, "erm-converter-roboost-loop", 120, erm_loop},
      {7, "counterexample", 60, counterexample},
      {8, "uroboost", 60, uroboost},
      {9, "granular-cascade", 30, granular},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.passed = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) {
      v.passed = false;
      v.detail += " (over the " + fmt(c.limit_seconds) + " s limit)";
    }
    all = all && v.passed;
    std::printf("%s %d %s %.2fs %s\n", v.passed ? "PASS" : "FAIL", c.id, c.name, secs, v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
