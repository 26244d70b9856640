#include "roboost/predictor.hpp"

#include "roboost/errors.hpp"

namespace roboost {

namespace {

SelectiveOutput common_label(const Labeling& h, const PointSet& preimage) {
  std::optional<Label> seen;
  for (Point x : preimage) {
    if (!seen) {
      seen = h[x];
    } else if (*seen != h[x]) {
      return SelectiveOutput::abstain();
    }
  }
  return seen ? SelectiveOutput::predict(*seen) : SelectiveOutput::abstain();
}

}  // namespace

PointSet robust_region(const Labeling& h, const PerturbationRelation& u) {
  const auto n = u.point_count();
  if (h.size() != n) throw InvalidArgument("hypothesis and relation live on different spaces");
  PointSet out(n);
  for (Point x = 0; x < n; ++x) {
    bool stable = true;
    for (Point z : u(x)) {
      if (h[z] != h[x]) {
        stable = false;
        break;
      }
    }
    if (stable) out.insert(x);
  }
  return out;
}

SelectiveOutput selective_predict(const Labeling& h, const PerturbationRelation& u, Point z) {
  const auto n = u.point_count();
  if (h.size() != n) throw InvalidArgument("hypothesis and relation live on different spaces");
  PointSet preimage(n);
  for (Point x = 0; x < n; ++x)
    if (u.contains(x, z)) preimage.insert(x);
  return common_label(h, preimage);
}

SelectiveClassifier::SelectiveClassifier(Labeling h, RelationPtr u)
    : h_(std::move(h)), u_(std::move(u)), forced_abstain_(u_->point_count()) {
  const auto n = u_->point_count();
  if (h_.size() != n) throw InvalidArgument("hypothesis and relation live on different spaces");
  const auto inverse = invert(*u_);
  outputs_.reserve(n);
  PointSet abstains(n);
  for (Point z = 0; z < n; ++z) {
    outputs_.push_back(common_label(h_, inverse(z)));
    if (outputs_.back().abstains()) abstains.insert(z);
  }
  for (Point x = 0; x < n; ++x)
    if ((*u_)(x).intersects(abstains)) forced_abstain_.insert(x);
}

Label CascadePredictor::operator()(Point z) const {
  if (stages_.empty()) throw InvalidArgument("cascade has no stages");
  for (const auto& stage : stages_) {
    const auto out = stage(z);
    if (!out.abstains()) return out.label();
  }
  switch (fallback_.rule) {
    case FallbackRule::last_stage_raw:
      return stages_.back().hypothesis()[z];
    case FallbackRule::fixed_label:
      return fallback_.fixed;
    case FallbackRule::first_stage_raw:
      break;
  }
  return stages_.front().hypothesis()[z];
}

Labeling CascadePredictor::tabulate() const {
  if (stages_.empty()) throw InvalidArgument("cascade has no stages");
  const auto n = stages_.front().relation().point_count();
  std::vector<Label> out(n);
  for (Point z = 0; z < n; ++z) out[z] = (*this)(z);
  return Labeling(std::move(out));
}

PointSet CascadePredictor::all_abstain_region(std::size_t universe) const {
  auto region = PointSet::full(universe);
  for (const auto& stage : stages_) region &= stage.forced_abstain_region();
  return region;
}

Label cascade_predict(const CascadePredictor& cascade, Point z) { return cascade(z); }

Label majority_vote(std::span<const Labeling> hypotheses, Point z, std::span<const Label> label_order) {
  if (hypotheses.empty()) throw InvalidArgument("majority vote over an empty list");
  std::vector<std::size_t> counts(label_order.size(), 0);
  for (const auto& h : hypotheses) {
    const Label y = h.at(z);
    std::size_t i = 0;
    while (i < label_order.size() && label_order[i] != y) ++i;
    if (i == label_order.size()) throw InvalidArgument("vote for a label outside the label set");
    ++counts[i];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return label_order[best];
}

MajorityPredictor::MajorityPredictor(InstanceSpace space, std::vector<Labeling> members)
    : space_(std::move(space)), members_(std::move(members)) {
  if (members_.empty()) throw InvalidArgument("majority vote over an empty list");
  for (const auto& h : members_)
    if (h.size() != space_.point_count()) throw InvalidArgument("ensemble member over the wrong space");
}

Labeling MajorityPredictor::tabulate() const {
  std::vector<Label> out(space_.point_count());
  for (Point z = 0; z < out.size(); ++z) out[z] = (*this)(z);
  return Labeling(std::move(out));
}

}  // namespace roboost
