#include "roboost/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "roboost/errors.hpp"

namespace roboost {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t ceil_count(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("non-finite count");
  if (x <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ splitmix64(index));
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidArgument("Rng::below(0)");
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

std::optional<std::size_t> ExampleSource::remaining() const {
  auto b = budget();
  if (!b) return std::nullopt;
  return *b > drawn() ? *b - drawn() : 0;
}

SamplingOracle::SamplingOracle(Distribution d, std::optional<Labeling> labeler, std::uint64_t seed,
                               std::optional<std::size_t> budget)
    : d_(std::move(d)), labeler_(std::move(labeler)), rng_(seed), seed_(seed), budget_(budget) {
  if (labeler_ && labeler_->size() != d_.point_count())
    throw InvalidArgument("labeler and distribution live on different spaces");
  cumulative_.resize(d_.point_count());
  double acc = 0.0;
  for (Point x = 0; x < d_.point_count(); ++x) {
    acc += d_[x];
    cumulative_[x] = acc;
  }
}

Draw SamplingOracle::draw() {
  if (budget_ && drawn_ >= *budget_) throw BudgetExhausted(drawn_, *budget_);
  const double u = rng_.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  Point x = it == cumulative_.end() ? d_.point_count() - 1 : static_cast<Point>(it - cumulative_.begin());
  // Rounding at the top end could land on a trailing zero-mass point.
  while (d_[x] <= 0.0 && x > 0) --x;
  ++drawn_;
  if (labeler_) return {x, (*labeler_)[x]};
  return {x, std::nullopt};
}

LabeledExample SamplingOracle::next() {
  if (!labeler_) throw InvalidArgument("labeled draw from an unlabeled oracle");
  auto d = draw();
  return {d.x, *d.y};
}

std::optional<ExactView> SamplingOracle::exact() const {
  if (!labeler_) return std::nullopt;
  return ExactView{d_, *labeler_};
}

LabeledExample ReplayOracle::next() {
  if (next_ >= sample_.size()) throw BudgetExhausted(next_, sample_.size());
  return sample_[next_++];
}

LabeledExample PseudoLabelOracle::next() {
  auto d = source_.draw();
  ++drawn_;
  return {d.x, labeler_[d.x]};
}

std::optional<std::size_t> PseudoLabelOracle::budget() const {
  auto rest = source_.remaining();
  if (!rest) return std::nullopt;
  return drawn_ + *rest;
}

std::optional<ExactView> PseudoLabelOracle::exact() const {
  return ExactView{source_.distribution(), labeler_};
}

LabeledExample CappedSource::next() {
  if (drawn_ >= cap_) throw BudgetExhausted(drawn_, cap_);
  auto e = inner_.next();
  ++drawn_;
  return e;
}

std::optional<std::size_t> CappedSource::budget() const {
  auto rest = inner_.remaining();
  if (!rest) return cap_;
  return std::min(cap_, drawn_ + *rest);
}

LabeledSample drain(ExampleSource& source, std::size_t m) {
  LabeledSample out;
  out.reserve(m);
  while (out.size() < m) {
    if (auto rest = source.remaining(); rest && *rest == 0) break;
    out.push_back(source.next());
  }
  return out;
}

double geometric_tail_check(double p, std::size_t m, std::size_t trials, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("acceptance probability must lie in (0, 1]");
  if (m == 0) throw InvalidArgument("batch size must be positive");
  if (trials == 0) return 0.0;
  const double limit = 2.0 * static_cast<double>(m) / p;
  std::size_t exceed = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, trial));
    std::size_t total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      do {
        ++total;
      } while (p < 1.0 && rng.uniform() >= p);
    }
    if (static_cast<double>(total) > limit) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(trials);
}

}  // namespace roboost
