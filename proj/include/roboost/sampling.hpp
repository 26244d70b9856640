#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "roboost/risk.hpp"
#include "roboost/space.hpp"

namespace roboost {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// ceil(x) with a 1e-9 allowance for floating noise, so ceil_count(40.0000000001) == 40.
std::size_t ceil_count(double x);

/// Subseed for stream `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// The artifact's single generator: mt19937_64, with uniforms built from the
/// top 53 bits of each output.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool coin() { return (engine_() >> 63) != 0; }
  /// Uniform on 0..n-1, n >= 1.
  std::size_t below(std::size_t n);

private:
  std::mt19937_64 engine_;
};

/// Test-only access to the exact distribution an oracle samples from and the
/// labeling it attaches.
struct ExactView {
  Distribution distribution;
  Labeling labeler;
};

/// Pull-based source of labeled examples with a draw counter.
class ExampleSource {
public:
  virtual ~ExampleSource() = default;

  /// Next labeled example. Throws BudgetExhausted when the budget is spent.
  virtual LabeledExample next() = 0;
  virtual std::size_t drawn() const = 0;
  virtual std::optional<std::size_t> budget() const { return std::nullopt; }
  virtual std::optional<ExactView> exact() const { return std::nullopt; }

  std::optional<std::size_t> remaining() const;
};

struct Draw {
  Point x;
  std::optional<Label> y;
};

/// Inverse-CDF sampler over an exact distribution, optionally labeled.
class SamplingOracle final : public ExampleSource {
public:
  SamplingOracle(Distribution d, std::optional<Labeling> labeler, std::uint64_t seed,
                 std::optional<std::size_t> budget = std::nullopt);

  Draw draw();
  /// draw() with the label required; throws InvalidArgument for unlabeled oracles.
  LabeledExample next() override;
  std::size_t drawn() const override { return drawn_; }
  std::optional<std::size_t> budget() const override { return budget_; }
  std::optional<ExactView> exact() const override;

  const Distribution& distribution() const noexcept { return d_; }
  std::uint64_t seed() const noexcept { return seed_; }

private:
  Distribution d_;
  std::optional<Labeling> labeler_;
  std::vector<double> cumulative_;
  Rng rng_;
  std::uint64_t seed_;
  std::size_t drawn_ = 0;
  std::optional<std::size_t> budget_;
};

/// Hands out a fixed sample in order; its budget is the sample size.
class ReplayOracle final : public ExampleSource {
public:
  explicit ReplayOracle(LabeledSample sample, std::optional<ExactView> view = std::nullopt)
      : sample_(std::move(sample)), view_(std::move(view)) {}

  LabeledExample next() override;
  std::size_t drawn() const override { return next_; }
  std::optional<std::size_t> budget() const override { return sample_.size(); }
  std::optional<ExactView> exact() const override { return view_; }

private:
  LabeledSample sample_;
  std::optional<ExactView> view_;
  std::size_t next_ = 0;
};

/// Unlabeled draws from `source`, labeled by `labeler`.
class PseudoLabelOracle final : public ExampleSource {
public:
  PseudoLabelOracle(SamplingOracle& source, Labeling labeler) : source_(source), labeler_(std::move(labeler)) {}

  LabeledExample next() override;
  std::size_t drawn() const override { return drawn_; }
  std::optional<std::size_t> budget() const override;
  std::optional<ExactView> exact() const override;

private:
  SamplingOracle& source_;
  Labeling labeler_;
  std::size_t drawn_ = 0;
};

/// Forwards to `inner` but refuses to go past `cap` draws of its own.
class CappedSource final : public ExampleSource {
public:
  CappedSource(ExampleSource& inner, std::size_t cap) : inner_(inner), cap_(cap) {}

  LabeledExample next() override;
  std::size_t drawn() const override { return drawn_; }
  /// The cap, or less when `inner` runs dry first.
  std::optional<std::size_t> budget() const override;
  std::optional<ExactView> exact() const override { return inner_.exact(); }

private:
  ExampleSource& inner_;
  std::size_t cap_;
  std::size_t drawn_ = 0;
};

/// Draws `m` examples, or fewer if the source runs dry first.
LabeledSample drain(ExampleSource& source, std::size_t m);

/// Fraction of `trials` in which the sum of m Geometric(p) variables exceeds
/// 2m/p. Theory bounds the exceedance probability by exp(-m/4).
double geometric_tail_check(double p, std::size_t m, std::size_t trials, std::uint64_t seed);

}  // namespace roboost
