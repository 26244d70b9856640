#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "roboost/predictor.hpp"
#include "roboost/risk.hpp"
#include "roboost/sampling.hpp"

namespace roboost {

/// Robust on a beta-fraction w.r.t. U^{-1}(U), natural error <= epsilon, confidence 1 - delta.
struct BarelyRobustTerms {
  double beta;
  double epsilon;
  double delta;
};

/// As BarelyRobustTerms, with natural error allowed to grow by the labeler's error (<= eta).
struct NoiseTolerantTerms {
  double eta;
  double beta;
  double epsilon;
  double delta;
};

/// Robust risk <= epsilon w.r.t. U with confidence 1 - delta.
struct StrongRobustTerms {
  double epsilon;
  double delta;
};

using ContractTerms = std::variant<BarelyRobustTerms, NoiseTolerantTerms, StrongRobustTerms>;

std::string contract_kind(const ContractTerms& terms);
/// Throws InvalidArgument when a parameter is out of range.
void validate_terms(const ContractTerms& terms);

/// A black-box learner: a body fed by a budgeted example source, plus the
/// guarantee it claims and the number of draws it consumes.
class Learner {
public:
  using Body = std::function<Hypothesis(ExampleSource&, Rng&)>;

  Learner(std::string name, ContractTerms terms, std::size_t sample_size, Body body);

  const std::string& name() const noexcept { return name_; }
  const ContractTerms& terms() const noexcept { return terms_; }
  std::size_t sample_size() const noexcept { return sample_size_; }

  /// Runs the body on `oracle`, never letting it take more than sample_size() draws.
  Hypothesis invoke(ExampleSource& oracle, std::uint64_t seed) const;

private:
  std::string name_;
  ContractTerms terms_;
  std::size_t sample_size_;
  Body body_;
};

/// h_theta(x) = +1 iff x >= theta, for theta = 0..n.
std::vector<Labeling> threshold_class(std::size_t n);

/// argmin over `concepts` of the empirical robust risk; ties go to the first
/// minimizer, and an empty sample returns concepts[0].
Hypothesis erm_robust(std::span<const Labeling> concepts, const LabeledSample& s, const PerturbationRelation& u);

/// erm_robust on the first `sample_size` draws.
Learner erm_learner(std::vector<Labeling> concepts, RelationPtr u, std::size_t sample_size, StrongRobustTerms terms);

/// g_y from a base predictor: y on the U^{-1}(U)-expansion of the points where
/// the base is U-robust with label y.
struct ExpansionPredictor {
  Labeling base;
  Label target;
  RelationPtr relation;
  PointSet region;
  Labeling realized;
};

/// Outside the region g_y keeps the base label when it differs from y and
/// otherwise switches to the first other label.
ExpansionPredictor expand(const Labeling& h, RelationPtr u, Label y);

/// ceil((64/9) ln(1/delta)).
std::size_t converter_rejection_size(double delta);

struct ConverterOptions {
  /// Choose the most frequent robust label instead of the +1/-1 rule. Needed
  /// for more than two labels; the guarantee then weakens to (1-eps)/|Y|.
  bool plurality = false;
};

struct ConversionTrace {
  Hypothesis base;
  LabeledSample accepted;
  double plus_fraction = 0.0;
  Label chosen = 0;
  std::size_t draws = 0;
  ExpansionPredictor output;
};

/// One run of the converted learner on `oracle`. Rejection sampling is only
/// bounded by the oracle budget; EmptyEvent when the base is robust nowhere.
ConversionTrace convert_once(const Learner& strong, ExampleSource& oracle, RelationPtr u, std::uint64_t seed,
                             ConverterOptions options = {});

/// Strong (eps, delta) learner -> barely ((1-eps)/2, 2 eps, 2 delta) learner
/// w.r.t. U^{-1}(U). Requires eps < 1/4.
Learner convert_strong_to_barely(Learner strong, RelationPtr u, ConverterOptions options = {});

/// h_y on the k-gadget space: z_n -> y_n, x_n^+ -> +1, x_n^- -> -1.
Labeling bitstring_concept(std::span<const Label> y);
std::vector<Label> draw_bitstring(std::size_t k, Rng& rng);
/// All 2^k bitstring concepts, bit n of the index giving y_n (1 -> +1).
std::vector<Labeling> bitstring_class(std::size_t k);

/// Ignores its sample and returns h_y for a uniformly random y.
Learner random_bitstring_learner(std::size_t k);

enum class ScriptMode { exact_beta, noise_tolerant };

struct ScriptOptions {
  double beta = 0.5;
  double epsilon_prime = 0.0;
  ScriptMode mode = ScriptMode::exact_beta;
  double eta = 0.0;
  double delta = 0.05;
};

/// Deterministic hypothesis built from exact knowledge of (D_t, target):
/// highest-mass support points whose U^{-1}(U)-neighborhood is target-constant
/// are made robust until their mass reaches beta, up to epsilon_prime of the
/// remaining support is mislabeled, and every other support point is made
/// non-robust where a free point allows it. In noise_tolerant mode the
/// target only needs to be constant on the support part of a neighborhood.
Hypothesis scripted_hypothesis(const Distribution& d, const Labeling& target, const PerturbationRelation& u,
                               const ScriptOptions& options);

/// Test double: drains its draws, then reads the oracle's exact view and
/// returns scripted_hypothesis. Throws InvalidArgument without an exact view.
Learner scripted_oracle_learner(RelationPtr u, ScriptOptions options, std::size_t sample_size);

}  // namespace roboost
