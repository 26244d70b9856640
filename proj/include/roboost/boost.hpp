#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "roboost/learners.hpp"
#include "roboost/predictor.hpp"
#include "roboost/sampling.hpp"

namespace roboost {

/// ceil(ln(2/eps) / beta).
std::size_t roboost_rounds(double beta, double epsilon);
/// max(m_A, ceil(4 ln(2T/delta))).
std::size_t roboost_sample_size(std::size_t m_a, std::size_t rounds, double delta);
/// ceil(4/eps): draws allowed per accepted point before rejection sampling gives up.
std::size_t rejection_budget(double epsilon);

struct RejectionResult {
  LabeledSample sample;  // empty when aborted
  std::size_t draws = 0;
  bool aborted = false;
};

/// Draws from `oracle` until m points of `region` are accepted. Gives up and
/// returns an empty sample as soon as one point costs more than
/// `per_point_budget` draws.
RejectionResult rejection_sampling(const PointSet& region, std::size_t m, ExampleSource& oracle,
                                   std::size_t per_point_budget);

/// Natural points on which every stage of `cascade` can be forced to abstain.
/// The full space for an empty cascade.
PointSet residual_region(const CascadePredictor& cascade, std::size_t point_count);

/// Per-round bookkeeping. Exact quantities are present only when the oracle
/// exposes its distribution.
struct RoundRecord {
  std::size_t t = 0;
  std::size_t draws = 0;
  std::size_t sample_size = 0;
  std::optional<double> beta_t;         // D_t(Rob_{U^-1(U)}(h_t))
  std::optional<double> natural_error;  // Pr_{D_t}[h_t != labeler]
  std::optional<double> residual;       // p_t = D(residual after t rounds)
  std::optional<double> radius;         // granular runs
  std::optional<double> weighted_risk;  // alpha-Boost acceptance value
  std::optional<double> weight_sum;     // alpha-Boost weights after renormalization
  std::size_t attempts = 1;
  bool contract_violation = false;
};

struct BoostRun {
  std::string procedure;
  std::vector<RoundRecord> rounds;
  std::size_t planned_rounds = 0;
  std::size_t sample_size = 0;
  std::size_t per_point_budget = 0;
  std::size_t labeled_draws = 0;
  std::size_t unlabeled_draws = 0;
  std::size_t oracle_calls = 0;
  bool early_stop = false;
  std::uint64_t seed = 0;

  bool flagged() const;
};

struct RoBoostParams {
  double beta;
  double epsilon;
  double delta;
};

struct RoBoostOptions {
  Fallback fallback{};
  std::uint64_t seed = 0;
  /// Overrides ceil(ln(2/eps)/beta) when set.
  std::optional<std::size_t> rounds;
};

struct RoBoostResult {
  CascadePredictor cascade;
  BoostRun run;
};

/// Boosts a barely robust learner (guarantee w.r.t. U^{-1}(U)) into a cascade
/// robust w.r.t. U. Contract violations are flagged in the run, not thrown.
RoBoostResult beta_roboost(ExampleSource& oracle, const Learner& a, RoBoostParams params, RelationPtr u,
                           RoBoostOptions options = {});

inline constexpr double kAlpha = 0.125;

/// 1 + ceil(48 ln|S|).
std::size_t alpha_rounds(std::size_t sample_count);
/// ceil(log_3(2T/delta)).
std::size_t alpha_retry_limit(std::size_t rounds, double delta);

struct AlphaOptions {
  std::uint64_t seed = 0;
  std::optional<std::size_t> rounds;
  /// Labeling attached to the exact view of each round's weighted oracle.
  /// Defaults to the sample's own labels, with S[0]'s label off the sample.
  std::optional<Labeling> exact_labeler;
};

struct AlphaResult {
  MajorityPredictor majority;
  BoostRun run;
  std::vector<double> margins;  // fraction of members robustly correct per sample point
  double min_margin = 0.0;
  double empirical_robust_risk = 0.0;
};

/// Boosts a (1/3, 1/3) weak robust learner on S. Each round the learner sees
/// its own draws from the current weights over S; the result is accepted when
/// its exact weighted robust risk is at most 1/3.
AlphaResult alpha_boost(const LabeledSample& s, const Learner& weak, RelationPtr u, double delta,
                        AlphaOptions options = {});

/// Draws from a weighting of a fixed sample.
class WeightedSampleOracle final : public ExampleSource {
public:
  WeightedSampleOracle(const LabeledSample& s, std::span<const double> weights, std::size_t point_count,
                       std::uint64_t seed, const std::optional<Labeling>& exact_labeler = std::nullopt);

  LabeledExample next() override;
  std::size_t drawn() const override { return indices_.drawn(); }
  std::optional<ExactView> exact() const override { return view_; }

private:
  const LabeledSample& s_;
  SamplingOracle indices_;
  std::optional<ExactView> view_;
};

/// The inner weak learner of the two-layer scheme: beta_roboost with
/// (eps0, delta0) = (1/3, 1/3) and ceil(ln 6 / beta) rounds.
Learner roboost_weak_learner(Learner a, RelationPtr u, Fallback fallback = {});

struct TwoLayerResult {
  AlphaResult outer;
  LabeledSample sample;
};

/// Draws |S| = sample_count examples from `oracle` and runs alpha_boost over
/// roboost_weak_learner(a). `a` must be (beta, <= beta/6, <= beta/(6 ln 6)).
TwoLayerResult two_layer_boost(ExampleSource& oracle, const Learner& a, std::size_t sample_count, RelationPtr u,
                               double delta, AlphaOptions options = {});

struct URoBoostResult {
  Hypothesis pseudo_labeler;
  RoBoostResult boost;
};

/// One labeled batch trains a pseudo-labeler; every later draw is unlabeled.
URoBoostResult beta_uroboost(SamplingOracle& labeled, SamplingOracle& unlabeled, const Learner& a,
                             RoBoostParams params, RelationPtr u, RoBoostOptions options = {});

struct GranularParams {
  double gamma;
  std::size_t levels;
  double epsilon;  // sets the per-point rejection budget
  std::size_t sample_size;
};

struct GranularResult {
  CascadePredictor cascade;
  BoostRun run;
  std::vector<double> radii;
  std::vector<PointSet> robust_regions;        // Rob_{U_t^-1(U_t)}(h_t)
  std::vector<PointSet> radius_robust_regions;  // Rob_{U_t}(h_t)
  std::optional<double> coverage;               // D(union of robust_regions)
};

using LearnerFamily = std::function<Learner(RelationPtr)>;

/// Round t learns with relation B_{gamma / 2^(t-1)}. Stops early when the
/// residual region is empty or rejection sampling gives up.
GranularResult granular_boost(ExampleSource& oracle, const LearnerFamily& family, const InstanceSpace& space,
                              const Metric& metric, GranularParams params, RoBoostOptions options = {});

}  // namespace roboost
