#include "roboost/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "roboost/errors.hpp"

namespace roboost {

InstanceSpace::InstanceSpace(std::size_t point_count, std::vector<Label> labels)
    : point_count_(point_count), labels_(std::move(labels)) {
  if (point_count_ == 0) throw InvalidArgument("instance space needs at least one point");
  if (labels_.size() < 2) throw InvalidArgument("label set needs at least two labels");
  auto sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("labels must be distinct");
}

bool InstanceSpace::has_label(Label y) const noexcept {
  return std::find(labels_.begin(), labels_.end(), y) != labels_.end();
}

std::size_t InstanceSpace::label_index(Label y) const {
  auto it = std::find(labels_.begin(), labels_.end(), y);
  if (it == labels_.end()) throw InvalidArgument("label " + std::to_string(y) + " is not in the label set");
  return static_cast<std::size_t>(it - labels_.begin());
}

Label InstanceSpace::other_label(Label y) const {
  for (Label l : labels_)
    if (l != y) return l;
  return y;  // unreachable: |Y| >= 2
}

PerturbationRelation::PerturbationRelation(InstanceSpace space, std::vector<PointSet> neighbors)
    : space_(std::move(space)), neighbors_(std::move(neighbors)) {
  const auto n = space_.point_count();
  if (neighbors_.size() != n)
    throw InvalidArgument("relation has " + std::to_string(neighbors_.size()) + " rows for " +
                          std::to_string(n) + " points");
  for (auto& row : neighbors_)
    if (row.universe() != n) throw InvalidArgument("relation row over the wrong universe");

  reflexive_ = true;
  symmetric_ = true;
  for (Point x = 0; x < n; ++x) {
    if (!neighbors_[x].contains(x)) reflexive_ = false;
    for (Point z : neighbors_[x])
      if (!neighbors_[z].contains(x)) symmetric_ = false;
  }
}

PerturbationRelation PerturbationRelation::from_adjacency(InstanceSpace space,
                                                          const std::vector<std::vector<Point>>& adjacency) {
  const auto n = space.point_count();
  if (adjacency.size() != n)
    throw InvalidArgument("adjacency has " + std::to_string(adjacency.size()) + " rows for " +
                          std::to_string(n) + " points");
  std::vector<PointSet> rows;
  rows.reserve(n);
  for (Point x = 0; x < n; ++x) {
    PointSet row(n);
    for (Point z : adjacency[x]) {
      if (z >= n)
        throw InvalidArgument("neighbor " + std::to_string(z) + " of point " + std::to_string(x) +
                              " is out of range");
      row.insert(z);
    }
    rows.push_back(std::move(row));
  }
  return {std::move(space), std::move(rows)};
}

std::vector<std::vector<Point>> PerturbationRelation::adjacency() const {
  std::vector<std::vector<Point>> out;
  out.reserve(neighbors_.size());
  for (const auto& row : neighbors_) out.push_back(row.to_vector());
  return out;
}

Metric path_metric() {
  return [](Point a, Point b) { return static_cast<double>(a > b ? a - b : b - a); };
}

Metric grid_l1_metric(std::size_t width) {
  if (width == 0) throw InvalidArgument("grid width must be positive");
  return [width](Point a, Point b) {
    const auto dr = static_cast<long long>(a / width) - static_cast<long long>(b / width);
    const auto dc = static_cast<long long>(a % width) - static_cast<long long>(b % width);
    return static_cast<double>(std::llabs(dr) + std::llabs(dc));
  };
}

Metric grid_linf_metric(std::size_t width) {
  if (width == 0) throw InvalidArgument("grid width must be positive");
  return [width](Point a, Point b) {
    const auto dr = static_cast<long long>(a / width) - static_cast<long long>(b / width);
    const auto dc = static_cast<long long>(a % width) - static_cast<long long>(b % width);
    return static_cast<double>(std::max(std::llabs(dr), std::llabs(dc)));
  };
}

PerturbationRelation make_metric_ball(const InstanceSpace& space, const Metric& metric, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("ball radius must be nonnegative");
  const auto n = space.point_count();
  std::vector<PointSet> rows(n, PointSet(n));
  for (Point x = 0; x < n; ++x) {
    for (Point z = x; z < n; ++z) {
      const double d = metric(x, z);
      if (x == z ? d != 0.0 : !(d >= 0.0) || d != metric(z, x))
        throw InvalidArgument("metric must be symmetric, nonnegative and vanish on the diagonal");
      if (d <= radius) {
        rows[x].insert(z);
        rows[z].insert(x);
      }
    }
  }
  return {space, std::move(rows)};
}

PerturbationRelation invert(const PerturbationRelation& u) {
  const auto n = u.point_count();
  std::vector<PointSet> rows(n, PointSet(n));
  for (Point x = 0; x < n; ++x)
    for (Point z : u(x)) rows[z].insert(x);
  return {u.space(), std::move(rows)};
}

PerturbationRelation compose_inverse(const PerturbationRelation& u) {
  const auto n = u.point_count();
  const auto inverse = invert(u);
  std::vector<PointSet> rows(n, PointSet(n));
  for (Point x = 0; x < n; ++x)
    for (Point z : u(x)) rows[x] |= inverse(z);
  return {u.space(), std::move(rows)};
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

Distribution::Distribution(std::vector<double> mass) : mass_(std::move(mass)), support_(mass_.size()) {
  if (mass_.empty()) throw InvalidArgument("distribution over an empty space");
  for (Point x = 0; x < mass_.size(); ++x) {
    if (!std::isfinite(mass_[x]) || mass_[x] < 0.0)
      throw InvalidArgument("mass of point " + std::to_string(x) + " is negative or not finite");
    if (mass_[x] > 0.0) support_.insert(x);
  }
  const double total = stable_sum(mass_);
  if (std::abs(total - 1.0) > kMassTolerance)
    throw InvalidArgument("distribution mass sums to " + std::to_string(total) + ", not 1");
}

Distribution Distribution::uniform(std::size_t point_count, const PointSet& support) {
  if (support.empty()) throw InvalidArgument("uniform distribution over an empty support");
  std::vector<double> mass(point_count, 0.0);
  const double w = 1.0 / static_cast<double>(support.size());
  for (Point x : support) mass.at(x) = w;
  return Distribution::from_weights(std::move(mass));
}

Distribution Distribution::point_mass(std::size_t point_count, Point x) {
  std::vector<double> mass(point_count, 0.0);
  mass.at(x) = 1.0;
  return Distribution(std::move(mass));
}

Distribution Distribution::from_weights(std::vector<double> weights) {
  for (double w : weights)
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("weights must be finite and nonnegative");
  const double total = stable_sum(weights);
  if (!(total > 0.0)) throw InvalidArgument("weights have zero total");
  for (double& w : weights) w /= total;
  // Renormalizing once more absorbs the rounding left by the division.
  const double again = stable_sum(weights);
  if (std::abs(again - 1.0) > kMassTolerance)
    for (double& w : weights) w /= again;
  return Distribution(std::move(weights));
}

double Distribution::measure(const PointSet& event) const {
  std::vector<double> parts;
  parts.reserve(support_.size());
  for (Point x : support_)
    if (event.contains(x)) parts.push_back(mass_[x]);
  return stable_sum(parts);
}

Distribution condition(const Distribution& d, const PointSet& event) {
  const double total = d.measure(event);
  if (total <= kMassTolerance) throw EmptyEvent("conditioning event has zero mass");
  std::vector<double> mass(d.point_count(), 0.0);
  for (Point x : d.support())
    if (event.contains(x)) mass[x] = d[x] / total;
  return Distribution::from_weights(std::move(mass));
}

bool check_robust_realizable(const Distribution& d, const Labeling& c, const PerturbationRelation& u) {
  if (d.point_count() != u.point_count() || c.size() != u.point_count())
    throw InvalidArgument("distribution, concept and relation live on different spaces");
  for (Point x : d.support())
    for (Point z : u(x))
      if (c[z] != c[x]) return false;
  return true;
}

}  // namespace roboost
