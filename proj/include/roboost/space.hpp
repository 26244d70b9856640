#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "roboost/point_set.hpp"

namespace roboost {

using Label = int;

/// Absolute tolerance for every probability comparison in the library.
inline constexpr double kMassTolerance = 1e-12;

/// Points 0..n-1 plus an ordered label set. The label order is used for
/// tie-breaking (majority votes) and for picking "the other" label.
class InstanceSpace {
public:
  InstanceSpace(std::size_t point_count, std::vector<Label> labels);
  static InstanceSpace binary(std::size_t point_count) { return {point_count, {-1, +1}}; }

  std::size_t point_count() const noexcept { return point_count_; }
  std::span<const Label> labels() const noexcept { return labels_; }
  bool has_label(Label y) const noexcept;
  /// Position of `y` in the label order; throws InvalidArgument for unknown labels.
  std::size_t label_index(Label y) const;
  /// First label in the label order that differs from `y`.
  Label other_label(Label y) const;

  bool operator==(const InstanceSpace&) const = default;

private:
  std::size_t point_count_;
  std::vector<Label> labels_;
};

/// Total labeling X -> Y. Used both for target concepts and for hypotheses.
class Labeling {
public:
  Labeling() = default;
  explicit Labeling(std::vector<Label> labels) : labels_(std::move(labels)) {}
  Labeling(std::initializer_list<Label> labels) : labels_(labels) {}
  static Labeling constant(std::size_t n, Label y) { return Labeling(std::vector<Label>(n, y)); }

  std::size_t size() const noexcept { return labels_.size(); }
  Label operator[](Point x) const { return labels_[x]; }
  Label& operator[](Point x) { return labels_[x]; }
  Label at(Point x) const { return labels_.at(x); }
  std::span<const Label> values() const noexcept { return labels_; }

  bool operator==(const Labeling&) const = default;

private:
  std::vector<Label> labels_;
};

using Concept = Labeling;
using Hypothesis = Labeling;

/// Explicit set-valued map x -> U(x) over a finite instance space.
class PerturbationRelation {
public:
  PerturbationRelation(InstanceSpace space, std::vector<PointSet> neighbors);
  static PerturbationRelation from_adjacency(InstanceSpace space,
                                             const std::vector<std::vector<Point>>& adjacency);

  const InstanceSpace& space() const noexcept { return space_; }
  std::size_t point_count() const noexcept { return space_.point_count(); }

  /// U(x)
  const PointSet& operator()(Point x) const { return neighbors_.at(x); }
  bool contains(Point x, Point z) const { return neighbors_.at(x).contains(z); }

  bool is_reflexive() const noexcept { return reflexive_; }
  bool is_symmetric() const noexcept { return symmetric_; }

  std::vector<std::vector<Point>> adjacency() const;

  bool operator==(const PerturbationRelation& other) const {
    return space_ == other.space_ && neighbors_ == other.neighbors_;
  }

private:
  InstanceSpace space_;
  std::vector<PointSet> neighbors_;
  bool reflexive_ = false;
  bool symmetric_ = false;
};

using Metric = std::function<double(Point, Point)>;

/// |i - j| on the points of a path.
Metric path_metric();
/// Manhattan distance on a row-major grid of the given width.
Metric grid_l1_metric(std::size_t width);
/// Chebyshev distance on a row-major grid of the given width.
Metric grid_linf_metric(std::size_t width);

/// U(x) = {z : metric(x, z) <= radius}.
PerturbationRelation make_metric_ball(const InstanceSpace& space, const Metric& metric, double radius);

/// U^{-1}(z) = {x : z in U(x)}.
PerturbationRelation invert(const PerturbationRelation& u);

/// U^{-1}(U)(x) = union of U^{-1}(z) over z in U(x): every natural point that
/// shares at least one perturbation with x.
PerturbationRelation compose_inverse(const PerturbationRelation& u);

/// Exact probability vector over the points of a finite space.
class Distribution {
public:
  /// Validates nonnegativity and total mass 1 (within kMassTolerance).
  explicit Distribution(std::vector<double> mass);

  static Distribution uniform(std::size_t point_count, const PointSet& support);
  static Distribution uniform(std::size_t point_count) { return uniform(point_count, PointSet::full(point_count)); }
  static Distribution point_mass(std::size_t point_count, Point x);
  /// Normalizes arbitrary nonnegative weights with positive total.
  static Distribution from_weights(std::vector<double> weights);

  std::size_t point_count() const noexcept { return mass_.size(); }
  double operator[](Point x) const { return mass_.at(x); }
  std::span<const double> masses() const noexcept { return mass_; }
  const PointSet& support() const noexcept { return support_; }

  /// D(event), compensated summation over the support.
  double measure(const PointSet& event) const;

private:
  std::vector<double> mass_;
  PointSet support_;
};

/// Neumaier-compensated sum.
double stable_sum(std::span<const double> values);

/// D( . | event). Throws EmptyEvent when D(event) <= kMassTolerance.
Distribution condition(const Distribution& d, const PointSet& event);

/// True iff c(z) = c(x) for every x in support(D) and every z in U(x).
bool check_robust_realizable(const Distribution& d, const Labeling& c, const PerturbationRelation& u);

}  // namespace roboost
