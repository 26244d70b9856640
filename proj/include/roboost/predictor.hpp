#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "roboost/space.hpp"

namespace roboost {

using RelationPtr = std::shared_ptr<const PerturbationRelation>;

inline RelationPtr share(PerturbationRelation u) {
  return std::make_shared<const PerturbationRelation>(std::move(u));
}

/// Rob_U(h) = {x : h(z) = h(x) for every z in U(x)}.
PointSet robust_region(const Labeling& h, const PerturbationRelation& u);

/// A label or the abstention mark.
class SelectiveOutput {
public:
  SelectiveOutput() = default;  // abstain
  static SelectiveOutput abstain() { return {}; }
  static SelectiveOutput predict(Label y) { return SelectiveOutput(y); }

  bool abstains() const noexcept { return !label_.has_value(); }
  Label label() const { return label_.value(); }

  bool operator==(const SelectiveOutput&) const = default;

private:
  explicit SelectiveOutput(Label y) : label_(y) {}
  std::optional<Label> label_;
};

/// G_h(z): the common label of h over U^{-1}(z), or abstain when those labels
/// disagree. An empty preimage also abstains.
SelectiveOutput selective_predict(const Labeling& h, const PerturbationRelation& u, Point z);

/// G_h tabulated over every query point. The inverse relation is built eagerly
/// in the constructor, so instances are read-only afterwards.
class SelectiveClassifier {
public:
  SelectiveClassifier(Labeling h, RelationPtr u);

  SelectiveOutput operator()(Point z) const { return outputs_.at(z); }
  const Labeling& hypothesis() const noexcept { return h_; }
  const PerturbationRelation& relation() const noexcept { return *u_; }
  const RelationPtr& relation_ptr() const noexcept { return u_; }

  /// {x : some z in U(x) makes G_h abstain}.
  const PointSet& forced_abstain_region() const noexcept { return forced_abstain_; }

private:
  Labeling h_;
  RelationPtr u_;
  std::vector<SelectiveOutput> outputs_;
  PointSet forced_abstain_;
};

enum class FallbackRule { first_stage_raw, last_stage_raw, fixed_label };

/// What a cascade answers when every stage abstains.
struct Fallback {
  FallbackRule rule = FallbackRule::first_stage_raw;
  Label fixed = 0;
};

/// CAS(h_1..h_T): the first stage whose selective classifier does not abstain decides.
class CascadePredictor {
public:
  explicit CascadePredictor(Fallback fallback = {}) : fallback_(fallback) {}

  void add_stage(SelectiveClassifier stage) { stages_.push_back(std::move(stage)); }
  void add_stage(Labeling h, RelationPtr u) { stages_.emplace_back(std::move(h), std::move(u)); }

  std::span<const SelectiveClassifier> stages() const noexcept { return stages_; }
  std::size_t size() const noexcept { return stages_.size(); }
  const Fallback& fallback() const noexcept { return fallback_; }

  /// Throws InvalidArgument on an empty cascade.
  Label operator()(Point z) const;
  Labeling tabulate() const;

  /// Intersection of the stages' forced-abstain regions: the natural points on
  /// which every stage can be driven to abstain.
  PointSet all_abstain_region(std::size_t universe) const;

private:
  std::vector<SelectiveClassifier> stages_;
  Fallback fallback_;
};

Label cascade_predict(const CascadePredictor& cascade, Point z);

/// Plurality label of {h_t(z)}; ties go to the label earliest in `label_order`.
Label majority_vote(std::span<const Labeling> hypotheses, Point z, std::span<const Label> label_order);

class MajorityPredictor {
public:
  MajorityPredictor(InstanceSpace space, std::vector<Labeling> members);

  Label operator()(Point z) const { return majority_vote(members_, z, space_.labels()); }
  Labeling tabulate() const;
  std::span<const Labeling> members() const noexcept { return members_; }

private:
  InstanceSpace space_;
  std::vector<Labeling> members_;
};

}  // namespace roboost
