#include <algorithm>
#include <cstdint>
#include <map>

#include "roboost/errors.hpp"
#include "roboost/risk.hpp"

namespace roboost {

namespace {

// One candidate (z, x+, x-) triple together with how every concept reacts to
// it: +1 if the concept is constantly +1 on U(x+), -1 if constantly -1 on
// U(x-), 0 otherwise.
struct Gadget {
  Point z;
  Point x_plus;
  Point x_minus;
  std::vector<std::int8_t> reaction;
};

std::int8_t reaction_of(const Labeling& h, const PerturbationRelation& u, Point x_plus, Point x_minus) {
  if (robustly_correct(h, u, x_plus, +1)) return +1;
  if (robustly_correct(h, u, x_minus, -1)) return -1;
  return 0;
}

// Gadgets grouped by z, deduplicated by reaction vector; gadgets that no
// concept can label both ways are dropped since they cannot appear in any
// shattered sequence.
std::vector<std::vector<Gadget>> enumerate_gadgets(std::span<const Labeling> concepts,
                                                   const PerturbationRelation& u) {
  const auto n = u.point_count();
  const auto inverse = invert(u);
  std::vector<std::vector<Gadget>> by_z(n);
  for (Point z = 0; z < n; ++z) {
    std::map<std::vector<std::int8_t>, bool> seen;
    for (Point a : inverse(z)) {
      for (Point b : inverse(z)) {
        if (a == b) continue;
        std::vector<std::int8_t> reaction;
        reaction.reserve(concepts.size());
        bool any_plus = false;
        bool any_minus = false;
        for (const auto& h : concepts) {
          reaction.push_back(reaction_of(h, u, a, b));
          any_plus = any_plus || reaction.back() > 0;
          any_minus = any_minus || reaction.back() < 0;
        }
        if (!any_plus || !any_minus) continue;
        if (seen.emplace(reaction, true).second) by_z[z].push_back({z, a, b, std::move(reaction)});
      }
    }
  }
  return by_z;
}

struct Search {
  const std::vector<std::vector<Gadget>>& by_z;
  std::size_t target;
  std::vector<const Gadget*> chosen;

  // alive: indices of concepts that fix a label on every chosen gadget,
  // patterns: their label patterns packed as bits.
  bool extend(Point next_z, const std::vector<std::size_t>& alive, const std::vector<std::uint32_t>& patterns) {
    if (chosen.size() == target) return true;
    const std::size_t depth = chosen.size() + 1;
    const std::size_t needed = std::size_t{1} << depth;
    for (Point z = next_z; z < by_z.size(); ++z) {
      // Not enough z's left to finish the sequence.
      if (by_z.size() - z < target - chosen.size()) break;
      for (const auto& g : by_z[z]) {
        std::vector<std::size_t> alive_next;
        std::vector<std::uint32_t> patterns_next;
        std::vector<bool> hit(needed, false);
        std::size_t distinct = 0;
        for (std::size_t i = 0; i < alive.size(); ++i) {
          const auto r = g.reaction[alive[i]];
          if (r == 0) continue;
          const std::uint32_t p = (patterns[i] << 1) | (r > 0 ? 1U : 0U);
          alive_next.push_back(alive[i]);
          patterns_next.push_back(p);
          if (!hit[p]) {
            hit[p] = true;
            ++distinct;
          }
        }
        if (distinct != needed) continue;
        chosen.push_back(&g);
        if (extend(z + 1, alive_next, patterns_next)) return true;
        chosen.pop_back();
      }
    }
    return false;
  }
};

void require_binary(std::span<const Labeling> concepts, std::size_t n) {
  for (const auto& h : concepts) {
    if (h.size() != n) throw InvalidArgument("concept and relation live on different spaces");
    for (Label y : h.values())
      if (y != -1 && y != +1) throw InvalidArgument("robust shattering is defined for labels -1/+1 only");
  }
}

}  // namespace

std::optional<ShatteringWitness> find_robustly_shattered(std::span<const Labeling> concepts,
                                                         const PerturbationRelation& u, std::size_t k) {
  require_binary(concepts, u.point_count());
  if (k == 0) return ShatteringWitness{};
  if (k > 31) throw InvalidArgument("shattering search supports k <= 31");
  if (concepts.size() < (std::size_t{1} << std::min<std::size_t>(k, 31))) return std::nullopt;

  const auto by_z = enumerate_gadgets(concepts, u);
  Search search{by_z, k, {}};
  std::vector<std::size_t> alive(concepts.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
  std::vector<std::uint32_t> patterns(concepts.size(), 0);
  if (!search.extend(0, alive, patterns)) return std::nullopt;

  ShatteringWitness w;
  for (const auto* g : search.chosen) {
    w.z.push_back(g->z);
    w.x_plus.push_back(g->x_plus);
    w.x_minus.push_back(g->x_minus);
  }
  return w;
}

std::size_t robust_shattering_dim(std::span<const Labeling> concepts, const PerturbationRelation& u,
                                  ShatteringOptions options) {
  if (u.point_count() > options.max_points)
    throw InvalidArgument("shattering search over " + std::to_string(u.point_count()) +
                          " points exceeds max_points = " + std::to_string(options.max_points));
  require_binary(concepts, u.point_count());
  // Shattering is hereditary, so the first failing k ends the scan.
  std::size_t dim = 0;
  for (std::size_t k = 1; k <= options.cap; ++k) {
    if (!find_robustly_shattered(concepts, u, k)) break;
    dim = k;
  }
  return dim;
}

}  // namespace roboost
