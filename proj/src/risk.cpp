#include "roboost/risk.hpp"

#include "roboost/errors.hpp"

namespace roboost {

namespace {

void require_same_space(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("arguments live on spaces of different sizes");
}

}  // namespace

bool robustly_correct(const Labeling& h, const PerturbationRelation& u, Point x, Label y) {
  for (Point z : u(x))
    if (h[z] != y) return false;
  return true;
}

double robust_risk(const Labeling& h, const Distribution& d, const Labeling& c, const PerturbationRelation& u) {
  require_same_space(h.size(), u.point_count());
  require_same_space(c.size(), u.point_count());
  require_same_space(d.point_count(), u.point_count());
  std::vector<double> parts;
  for (Point x : d.support())
    if (!robustly_correct(h, u, x, c[x])) parts.push_back(d[x]);
  return stable_sum(parts);
}

double robust_risk(const CascadePredictor& h, const Distribution& d, const Labeling& c,
                   const PerturbationRelation& u) {
  return robust_risk(h.tabulate(), d, c, u);
}

double robust_risk(const MajorityPredictor& h, const Distribution& d, const Labeling& c,
                   const PerturbationRelation& u) {
  return robust_risk(h.tabulate(), d, c, u);
}

double natural_error(const Labeling& h, const Distribution& d, const Labeling& c) {
  require_same_space(h.size(), d.point_count());
  require_same_space(c.size(), d.point_count());
  std::vector<double> parts;
  for (Point x : d.support())
    if (h[x] != c[x]) parts.push_back(d[x]);
  return stable_sum(parts);
}

double robustness_mass(const Labeling& h, const Distribution& d, const PerturbationRelation& u) {
  require_same_space(d.point_count(), u.point_count());
  return d.measure(robust_region(h, u));
}

RiskReport risk_report(const Labeling& h, const Distribution& d, const Labeling& c, const PerturbationRelation& u,
                       std::string relation_name) {
  return {robust_risk(h, d, c, u), natural_error(h, d, c), robustness_mass(h, d, u), std::move(relation_name)};
}

double empirical_robust_risk(const Labeling& h, const LabeledSample& s, const PerturbationRelation& u) {
  if (s.empty()) throw InvalidArgument("empirical robust risk of an empty sample");
  std::size_t wrong = 0;
  for (const auto& [x, y] : s)
    if (!robustly_correct(h, u, x, y)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

double weighted_robust_risk(const Labeling& h, const LabeledSample& s, std::span<const double> weights,
                            const PerturbationRelation& u) {
  if (weights.size() != s.size()) throw InvalidArgument("one weight per sample point is required");
  std::vector<double> parts;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!robustly_correct(h, u, s[i].x, s[i].y)) parts.push_back(weights[i]);
  return stable_sum(parts);
}

}  // namespace roboost
