#include <doctest.h>

#include <cmath>

#include <roboost/errors.hpp>
#include <roboost/sampling.hpp>

#include "worlds.hpp"

using namespace roboost;

TEST_CASE("ceil_count") {
  CHECK(ceil_count(40.0000000001) == 40);
  CHECK(ceil_count(40.1) == 41);
  CHECK(ceil_count(0.0) == 0);
  CHECK(ceil_count(-3.0) == 0);
  CHECK_THROWS_AS(ceil_count(std::nan("")), InvalidArgument);
}

TEST_CASE("derived seeds differ per stream") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}

TEST_CASE("rng ranges") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
  CHECK(rng.below(1) == 0);
}

TEST_CASE("point mass always draws its point") {
  SamplingOracle o(Distribution::point_mass(6, 4), std::nullopt, 3);
  for (int i = 0; i < 100; ++i) CHECK(o.draw().x == 4);
  CHECK(o.drawn() == 100);
}

TEST_CASE("zero-mass points are never drawn") {
  Distribution d({0.0, 0.5, 0.0, 0.5, 0.0});
  SamplingOracle o(d, std::nullopt, 8);
  for (int i = 0; i < 20000; ++i) {
    const auto x = o.draw().x;
    CHECK((x == 1 || x == 3));
  }
}

TEST_CASE("uniform frequencies") {
  SamplingOracle o(Distribution::uniform(4), std::nullopt, 17);
  std::vector<int> counts(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[o.draw().x];
  for (int c : counts) CHECK(std::abs(c / static_cast<double>(draws) - 0.25) <= 0.01);
}

TEST_CASE("property: frequencies within binomial bands") {
  Rng rng(31);
  for (int world = 0; world < 10; ++world) {
    const std::size_t n = 2 + rng.below(20);
    auto d = worlds::random_distribution(n, 0.7, rng);
    SamplingOracle o(d, std::nullopt, rng.next_u64());
    const int draws = 100000;
    std::vector<int> counts(n, 0);
    for (int i = 0; i < draws; ++i) ++counts[o.draw().x];
    for (Point x = 0; x < n; ++x) {
      const double p = d[x];
      const double sigma = std::sqrt(draws * p * (1 - p));
      CHECK(std::abs(counts[x] - draws * p) <= 3 * sigma + 1e-9);
    }
  }
}

TEST_CASE("replay determinism") {
  auto d = Distribution({0.1, 0.2, 0.3, 0.4});
  Labeling c{1, -1, 1, -1};
  SamplingOracle a(d, c, 42);
  SamplingOracle b(d, c, 42);
  for (int i = 0; i < 500; ++i) {
    auto ea = a.next();
    auto eb = b.next();
    CHECK(ea == eb);
    CHECK(ea.y == c[ea.x]);
  }
}

TEST_CASE("budgets") {
  SamplingOracle o(Distribution::uniform(3), Labeling{1, 1, 1}, 1, 5);
  CHECK(o.remaining() == 5);
  for (int i = 0; i < 5; ++i) o.next();
  CHECK(o.remaining() == 0);
  try {
    o.next();
    FAIL("expected BudgetExhausted");
  } catch (const BudgetExhausted& e) {
    CHECK(e.drawn() == 5);
    CHECK(e.budget() == 5);
  }
  CHECK(o.drawn() == 5);

  SamplingOracle unlabeled(Distribution::uniform(3), std::nullopt, 1);
  CHECK_THROWS_AS(unlabeled.next(), InvalidArgument);
  CHECK_FALSE(unlabeled.exact().has_value());
}

TEST_CASE("capped and replayed sources") {
  SamplingOracle o(Distribution::uniform(3), Labeling{1, 1, 1}, 2);
  CappedSource cap(o, 3);
  CHECK(drain(cap, 10).size() == 3);
  CHECK_THROWS_AS(cap.next(), BudgetExhausted);
  CHECK(o.drawn() == 3);

  SamplingOracle small(Distribution::uniform(3), Labeling{1, 1, 1}, 2, 2);
  CappedSource wide(small, 10);
  CHECK(wide.budget() == 2);
  CHECK(drain(wide, 10).size() == 2);

  ReplayOracle r({{0, 1}, {2, -1}});
  CHECK(r.next() == LabeledExample{0, 1});
  CHECK(r.next() == LabeledExample{2, -1});
  CHECK_THROWS_AS(r.next(), BudgetExhausted);
}

TEST_CASE("pseudo-labeled draws") {
  SamplingOracle source(Distribution::uniform(4), std::nullopt, 5, 10);
  Labeling h{1, 1, -1, -1};
  PseudoLabelOracle p(source, h);
  for (int i = 0; i < 10; ++i) {
    auto e = p.next();
    CHECK(e.y == h[e.x]);
  }
  CHECK(p.drawn() == 10);
  CHECK(source.drawn() == 10);
  CHECK(p.remaining() == 0);
  REQUIRE(p.exact().has_value());
  CHECK(p.exact()->labeler == h);
}

TEST_CASE("geometric tail check") {
  CHECK(geometric_tail_check(1.0, 10, 100, 1) == 0.0);
  CHECK(geometric_tail_check(0.5, 32, 10000, 2) <= std::exp(-8.0) + 0.005);
  CHECK_THROWS_AS(geometric_tail_check(0.0, 10, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(geometric_tail_check(0.5, 0, 10, 1), InvalidArgument);
  // m >= 4 ln(2T/delta) gives e^{-m/4} <= delta/(2T)
  const double t = 10;
  const double delta = 0.05;
  const auto m = ceil_count(4 * std::log(2 * t / delta));
  CHECK(std::exp(-static_cast<double>(m) / 4) <= delta / (2 * t));
}
