#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roboost/predictor.hpp"
#include "roboost/space.hpp"

namespace roboost {

struct LabeledExample {
  Point x;
  Label y;
  bool operator==(const LabeledExample&) const = default;
};

using LabeledSample = std::vector<LabeledExample>;

/// Exact risk functionals, each measured against the named relation.
struct RiskReport {
  double robust_risk = 0.0;
  double natural_error = 0.0;
  double robustness_mass = 0.0;
  std::string relation;
};

/// Pr_{x~D}[exists z in U(x): h(z) != c(x)], summed over support(D).
double robust_risk(const Labeling& h, const Distribution& d, const Labeling& c, const PerturbationRelation& u);
double robust_risk(const CascadePredictor& h, const Distribution& d, const Labeling& c,
                   const PerturbationRelation& u);
double robust_risk(const MajorityPredictor& h, const Distribution& d, const Labeling& c,
                   const PerturbationRelation& u);

/// Pr_{x~D}[h(x) != c(x)].
double natural_error(const Labeling& h, const Distribution& d, const Labeling& c);

/// D(Rob_U(h)). Pass compose_inverse(U) to measure robustness w.r.t. U^{-1}(U).
double robustness_mass(const Labeling& h, const Distribution& d, const PerturbationRelation& u);

RiskReport risk_report(const Labeling& h, const Distribution& d, const Labeling& c, const PerturbationRelation& u,
                       std::string relation_name);

/// Fraction of (x, y) in S with some z in U(x) where h(z) != y. Throws on empty S.
double empirical_robust_risk(const Labeling& h, const LabeledSample& s, const PerturbationRelation& u);

/// sum_i weights[i] * [exists z in U(x_i): h(z) != y_i].
double weighted_robust_risk(const Labeling& h, const LabeledSample& s, std::span<const double> weights,
                            const PerturbationRelation& u);

/// True iff h(z) = y for every z in U(x).
bool robustly_correct(const Labeling& h, const PerturbationRelation& u, Point x, Label y);

struct ShatteringOptions {
  std::size_t cap = 4;
  std::size_t max_points = 24;
};

/// Points z_i with their witnesses x_i^+ and x_i^-.
struct ShatteringWitness {
  std::vector<Point> z;
  std::vector<Point> x_plus;
  std::vector<Point> x_minus;
};

/// Searches for k points robustly shattered by the binary class `concepts`
/// (labels -1/+1). z_i are pairwise distinct and x_i^+ != x_i^- within a gadget.
std::optional<ShatteringWitness> find_robustly_shattered(std::span<const Labeling> concepts,
                                                         const PerturbationRelation& u, std::size_t k);

/// Largest k <= options.cap admitting a robustly shattered sequence; 0 if none.
/// Exhaustive, so spaces above options.max_points are rejected.
std::size_t robust_shattering_dim(std::span<const Labeling> concepts, const PerturbationRelation& u,
                                  ShatteringOptions options = {});

}  // namespace roboost
