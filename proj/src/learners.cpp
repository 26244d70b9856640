#include "roboost/learners.hpp"

#include <algorithm>
#include <cmath>

#include "roboost/errors.hpp"

namespace roboost {

namespace {

void require_unit(double v, const char* name, bool closed_low, bool closed_high) {
  const bool low_ok = closed_low ? v >= 0.0 : v > 0.0;
  const bool high_ok = closed_high ? v <= 1.0 : v < 1.0;
  if (!(low_ok && high_ok)) throw InvalidArgument(std::string(name) + " = " + std::to_string(v) + " is out of range");
}

}  // namespace

std::string contract_kind(const ContractTerms& terms) {
  struct Visitor {
    std::string operator()(const BarelyRobustTerms&) const { return "barely_robust"; }
    std::string operator()(const NoiseTolerantTerms&) const { return "noise_tolerant"; }
    std::string operator()(const StrongRobustTerms&) const { return "strong_robust"; }
  };
  return std::visit(Visitor{}, terms);
}

void validate_terms(const ContractTerms& terms) {
  struct Visitor {
    void operator()(const BarelyRobustTerms& t) const {
      if (!(t.beta > 0.0 && t.beta <= 1.0)) throw InvalidArgument("beta must lie in (0, 1]");
      require_unit(t.epsilon, "epsilon", true, false);
      require_unit(t.delta, "delta", false, false);
    }
    void operator()(const NoiseTolerantTerms& t) const {
      if (!(t.eta >= 0.0)) throw InvalidArgument("eta must be nonnegative");
      (*this)(BarelyRobustTerms{t.beta, t.epsilon, t.delta});
    }
    void operator()(const StrongRobustTerms& t) const {
      require_unit(t.epsilon, "epsilon", true, false);
      require_unit(t.delta, "delta", false, false);
    }
  };
  std::visit(Visitor{}, terms);
}

Learner::Learner(std::string name, ContractTerms terms, std::size_t sample_size, Body body)
    : name_(std::move(name)), terms_(terms), sample_size_(sample_size), body_(std::move(body)) {
  validate_terms(terms_);
  if (sample_size_ == 0) throw InvalidArgument("learner sample size must be at least 1");
  if (!body_) throw InvalidArgument("learner without a body");
}

Hypothesis Learner::invoke(ExampleSource& oracle, std::uint64_t seed) const {
  CappedSource capped(oracle, sample_size_);
  Rng rng(seed);
  return body_(capped, rng);
}

std::vector<Labeling> threshold_class(std::size_t n) {
  std::vector<Labeling> out;
  out.reserve(n + 1);
  for (std::size_t theta = 0; theta <= n; ++theta) {
    std::vector<Label> h(n);
    for (Point x = 0; x < n; ++x) h[x] = x >= theta ? +1 : -1;
    out.emplace_back(std::move(h));
  }
  return out;
}

Hypothesis erm_robust(std::span<const Labeling> concepts, const LabeledSample& s, const PerturbationRelation& u) {
  if (concepts.empty()) throw InvalidArgument("ERM over an empty class");
  if (s.empty()) return concepts.front();
  std::size_t best = 0;
  std::size_t best_wrong = s.size() + 1;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    std::size_t wrong = 0;
    for (const auto& [x, y] : s) {
      if (!robustly_correct(concepts[i], u, x, y) && ++wrong >= best_wrong) break;
    }
    if (wrong < best_wrong) {
      best = i;
      best_wrong = wrong;
      if (wrong == 0) break;
    }
  }
  return concepts[best];
}

Learner erm_learner(std::vector<Labeling> concepts, RelationPtr u, std::size_t sample_size, StrongRobustTerms terms) {
  if (concepts.empty()) throw InvalidArgument("ERM over an empty class");
  for (const auto& h : concepts)
    if (h.size() != u->point_count()) throw InvalidArgument("concept class over the wrong space");
  auto body = [concepts = std::move(concepts), u, sample_size](ExampleSource& src, Rng&) {
    return erm_robust(concepts, drain(src, sample_size), *u);
  };
  return Learner("erm", terms, sample_size, std::move(body));
}

ExpansionPredictor expand(const Labeling& h, RelationPtr u, Label y) {
  const auto n = u->point_count();
  if (h.size() != n) throw InvalidArgument("hypothesis and relation live on different spaces");
  if (!u->space().has_label(y)) throw InvalidArgument("expansion target is not a label of the space");
  const auto v = compose_inverse(*u);
  PointSet region(n);
  for (Point x : robust_region(h, *u))
    if (h[x] == y) region |= v(x);
  const Label other = u->space().other_label(y);
  std::vector<Label> g(n);
  for (Point x = 0; x < n; ++x) g[x] = region.contains(x) ? y : (h[x] != y ? h[x] : other);
  return {h, y, std::move(u), std::move(region), Labeling(std::move(g))};
}

std::size_t converter_rejection_size(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  return std::max<std::size_t>(1, ceil_count(64.0 / 9.0 * std::log(1.0 / delta)));
}

ConversionTrace convert_once(const Learner& strong, ExampleSource& oracle, RelationPtr u, std::uint64_t seed,
                             ConverterOptions options) {
  const auto* terms = std::get_if<StrongRobustTerms>(&strong.terms());
  if (!terms) throw InvalidArgument("the converter needs a strongly robust learner");
  const auto& space = u->space();
  if (!options.plurality && !(space.labels().size() == 2 && space.has_label(+1) && space.has_label(-1)))
    throw InvalidArgument("the +1/-1 converter rule needs labels {-1, +1}; use the plurality option");

  ConversionTrace trace;
  const auto before = oracle.drawn();
  trace.base = strong.invoke(oracle, derive_seed(seed, 0));
  const auto robust = robust_region(trace.base, *u);
  if (robust.empty()) throw EmptyEvent("the base hypothesis is robust nowhere");
  const auto m = converter_rejection_size(terms->delta);
  while (trace.accepted.size() < m) {
    auto e = oracle.next();
    if (robust.contains(e.x)) trace.accepted.push_back(e);
  }
  trace.draws = oracle.drawn() - before;

  std::vector<std::size_t> counts(space.labels().size(), 0);
  for (const auto& e : trace.accepted) ++counts[space.label_index(trace.base[e.x])];
  if (options.plurality) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i)
      if (counts[i] > counts[best]) best = i;
    trace.chosen = space.labels()[best];
    trace.plus_fraction = space.has_label(+1)
                              ? static_cast<double>(counts[space.label_index(+1)]) / static_cast<double>(m)
                              : 0.0;
  } else {
    trace.plus_fraction = static_cast<double>(counts[space.label_index(+1)]) / static_cast<double>(m);
    trace.chosen = trace.plus_fraction >= 0.5 ? +1 : -1;
  }
  trace.output = expand(trace.base, u, trace.chosen);
  return trace;
}

Learner convert_strong_to_barely(Learner strong, RelationPtr u, ConverterOptions options) {
  const auto* terms = std::get_if<StrongRobustTerms>(&strong.terms());
  if (!terms) throw InvalidArgument("the converter needs a strongly robust learner");
  const double eps = terms->epsilon;
  const double delta = terms->delta;
  if (!(eps < 0.25)) throw InvalidArgument("the converter needs epsilon < 1/4");
  if (!(2.0 * delta < 1.0)) throw InvalidArgument("the converter needs delta < 1/2");
  const auto m_tilde = converter_rejection_size(delta);
  const auto sample_size = strong.sample_size() + ceil_count(2.0 * static_cast<double>(m_tilde) / (1.0 - eps));
  const double label_count = options.plurality ? static_cast<double>(u->space().labels().size()) : 2.0;
  BarelyRobustTerms out{(1.0 - eps) / label_count, 2.0 * eps, 2.0 * delta};
  auto body = [strong = std::move(strong), u, options](ExampleSource& src, Rng& rng) {
    return convert_once(strong, src, u, rng.next_u64(), options).output.realized;
  };
  return Learner("converted_" + std::string(options.plurality ? "plurality" : "binary"), out, sample_size,
                 std::move(body));
}

Labeling bitstring_concept(std::span<const Label> y) {
  std::vector<Label> h(3 * y.size());
  for (std::size_t n = 0; n < y.size(); ++n) {
    if (y[n] != -1 && y[n] != +1) throw InvalidArgument("bitstring entries must be -1 or +1");
    h[3 * n] = +1;
    h[3 * n + 1] = -1;
    h[3 * n + 2] = y[n];
  }
  return Labeling(std::move(h));
}

std::vector<Label> draw_bitstring(std::size_t k, Rng& rng) {
  std::vector<Label> y(k);
  for (auto& v : y) v = rng.coin() ? +1 : -1;
  return y;
}

std::vector<Labeling> bitstring_class(std::size_t k) {
  if (k >= 20) throw InvalidArgument("bitstring class limited to k < 20");
  std::vector<Labeling> out;
  out.reserve(std::size_t{1} << k);
  std::vector<Label> y(k);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    for (std::size_t n = 0; n < k; ++n) y[n] = (mask >> n) & 1U ? +1 : -1;
    out.push_back(bitstring_concept(y));
  }
  return out;
}

Learner random_bitstring_learner(std::size_t k) {
  if (k == 0) throw InvalidArgument("gadget count must be positive");
  auto body = [k](ExampleSource& src, Rng& rng) {
    if (auto view = src.exact(); view && view->distribution.point_count() != 3 * k)
      throw InvalidArgument("random bitstring learner needs a " + std::to_string(k) + "-gadget space");
    return bitstring_concept(draw_bitstring(k, rng));
  };
  return Learner("random_bitstring", BarelyRobustTerms{0.5, 0.0, 0.5}, 1, std::move(body));
}

Hypothesis scripted_hypothesis(const Distribution& d, const Labeling& target, const PerturbationRelation& u,
                               const ScriptOptions& options) {
  const auto n = u.point_count();
  if (d.point_count() != n || target.size() != n) throw InvalidArgument("script inputs live on different spaces");
  const auto v = compose_inverse(u);
  const auto& space = u.space();
  const auto& support = d.support();

  PointSet perturbed_support(n);
  for (Point x : support) perturbed_support |= u(x);

  std::vector<Point> order = support.to_vector();
  std::stable_sort(order.begin(), order.end(), [&](Point a, Point b) { return d[a] > d[b]; });

  // In noise-tolerant mode the labeler only has to be constant on the support,
  // and the lock overrides it elsewhere.
  const bool noisy = options.mode == ScriptMode::noise_tolerant;
  PointSet locked(n);
  std::vector<Label> lock_value(n, 0);
  double robust_mass = 0.0;
  for (Point x : order) {
    if (robust_mass >= options.beta - kMassTolerance) break;
    bool constant = true;
    for (Point w : v(x)) {
      if ((!noisy || support.contains(w)) && target[w] != target[x]) constant = false;
      if (locked.contains(w) && lock_value[w] != target[x]) constant = false;
      if (!constant) break;
    }
    if (!constant) continue;
    for (Point w : v(x)) lock_value[w] = target[x];
    locked |= v(x);
    robust_mass += d[x];
  }
  if (robust_mass < options.beta - kMassTolerance)
    throw InfeasibleScript("only " + std::to_string(robust_mass) + " mass can be made robust, beta = " +
                           std::to_string(options.beta));

  Labeling h = target;
  for (Point w : locked) h[w] = lock_value[w];
  double injected = 0.0;
  for (Point x : support) {
    if (locked.contains(x)) continue;
    if (injected + d[x] <= options.epsilon_prime) {
      h[x] = space.other_label(target[x]);
      injected += d[x];
    }
  }

  // Values of fixed points never change again, so a fixed witness keeps x non-robust.
  PointSet fixed = locked | support;
  for (Point x : support) {
    if (locked.contains(x)) continue;
    bool unstable = false;
    for (Point w : v(x)) {
      if (fixed.contains(w) && h[w] != h[x]) {
        unstable = true;
        break;
      }
    }
    if (unstable) continue;
    std::optional<Point> pick;
    for (Point w : v(x)) {
      if (fixed.contains(w)) continue;
      if (!perturbed_support.contains(w)) {
        pick = w;
        break;
      }
      if (!pick) pick = w;
    }
    if (!pick) continue;
    if (h[*pick] == h[x]) h[*pick] = space.other_label(h[x]);
    fixed.insert(*pick);
  }
  return h;
}

Learner scripted_oracle_learner(RelationPtr u, ScriptOptions options, std::size_t sample_size) {
  ContractTerms terms = BarelyRobustTerms{options.beta, options.epsilon_prime, options.delta};
  if (options.mode == ScriptMode::noise_tolerant)
    terms = NoiseTolerantTerms{options.eta, options.beta, options.epsilon_prime, options.delta};
  auto body = [u, options, sample_size](ExampleSource& src, Rng&) {
    drain(src, sample_size);
    auto view = src.exact();
    if (!view) throw InvalidArgument("scripted learner needs an oracle with an exact view");
    return scripted_hypothesis(view->distribution, view->labeler, *u, options);
  };
  return Learner(options.mode == ScriptMode::exact_beta ? "scripted" : "scripted_noise_tolerant", terms, sample_size,
                 std::move(body));
}

}  // namespace roboost
