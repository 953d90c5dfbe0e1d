#include "higrid/higrid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace higrid {
namespace {

// H = log T - W/T with T = sum v, W = sum v log(v/A); zero-valued leaves
// contribute nothing to either accumulator.
struct EntropyState {
  double t = 0.0;
  double w = 0.0;

  void add(double v, double area) {
    if (v > 0.0) {
      t += v;
      w += v * std::log(v / area);
    }
  }
  void remove(double v, double area) {
    if (v > 0.0) {
      t -= v;
      w -= v * std::log(v / area);
    }
  }
  double entropy() const {
    if (!(t > 0.0)) throw std::domain_error("higrid: spatial entropy of an all-zero leaf set");
    return std::log(t) - w / t;
  }
};

EntropyState accumulate(std::span<const LeafValue> leaves) {
  EntropyState s;
  for (const LeafValue& lf : leaves) {
    if (lf.value < 0.0) throw std::domain_error("higrid: negative SRPD value");
    s.add(lf.value, pix_area(lf.node.level));
  }
  return s;
}

}  // namespace

double spatial_entropy(std::span<const LeafValue> leaves) {
  return accumulate(leaves).entropy();
}

double info_gain(std::span<const LeafValue> leaves, const HealpixNode& leaf,
                 const std::array<double, 4>& child_values) {
  EntropyState before = accumulate(leaves);
  double leaf_value = -1.0;
  for (const LeafValue& lf : leaves)
    if (lf.node == leaf) leaf_value = lf.value;
  if (leaf_value < 0.0) throw std::invalid_argument("higrid: info_gain leaf not in set");

  EntropyState after = before;
  after.remove(leaf_value, pix_area(leaf.level));
  for (double c : child_values) after.add(c, pix_area(leaf.level + 1));
  return before.entropy() - after.entropy();
}

SrpdMap higrid_run(const SteeringVector& sv, const CdCache& cache,
                   const RefinementPolicy& policy) {
  if (policy.l_max < 1) throw std::invalid_argument("higrid: l_max must be >= 1");
  if (cache.l_max() < policy.l_max)
    throw std::invalid_argument("higrid: cache does not cover l_max");

  SrpdMap map;
  map.l_max = policy.l_max;

  std::mt19937_64 rng(policy.rng_seed);

  std::vector<LeafValue> leaves;
  std::vector<LeafValue> frontier;
  std::size_t evals = 0;
  for (std::int64_t p = 0; p < 12; ++p) {
    HealpixNode node{0, p};
    frontier.push_back({node, srpd_eval(sv, cache.at(node))});
    ++evals;
  }
  double total = 0.0;
  for (const LeafValue& lf : frontier) total += lf.value;
  if (!(total > 0.0)) {
    // silent bin: uniform level-1 placeholder, flagged so callers drop it
    map.silent = true;
    for (std::int64_t p = 0; p < 48; ++p) map.leaves.push_back({{1, p}, 0.0});
    map.evaluation_count = evals;
    map.directions_per_level.assign(policy.l_max, map.leaves.size());
    return map;
  }

  for (int stage = 1; stage <= policy.l_max; ++stage) {
    std::shuffle(frontier.begin(), frontier.end(), rng);

    // entropy bookkeeping over the not-yet-visited frontier set B
    EntropyState state;
    for (const LeafValue& lf : frontier) state.add(lf.value, pix_area(lf.node.level));

    std::vector<LeafValue> next_frontier;
    for (const LeafValue& lf : frontier) {
      const double area = pix_area(lf.node.level);
      const double child_area = pix_area(lf.node.level + 1);
      auto kids = children(lf.node);
      std::array<double, 4> cv;
      for (int k = 0; k < 4; ++k) cv[k] = srpd_eval(sv, cache.at(kids[k]));
      evals += 4;

      bool accept = false;
      if (state.t > 0.0) {
        EntropyState cand = state;
        cand.remove(lf.value, area);
        for (double c : cv) cand.add(c, child_area);
        accept = cand.t > 0.0 && cand.entropy() < state.entropy();
      } else {
        // remaining frontier carries no mass; refine only if mass appears
        double csum = cv[0] + cv[1] + cv[2] + cv[3];
        accept = csum > 0.0;
      }

      if (accept) {
        for (int k = 0; k < 4; ++k) next_frontier.push_back({kids[k], cv[k]});
      } else {
        leaves.push_back(lf);  // pruned at its present level
      }
      state.remove(lf.value, area);
    }
    frontier = std::move(next_frontier);
    map.directions_per_level.push_back(leaves.size() + frontier.size());
  }

  leaves.insert(leaves.end(), frontier.begin(), frontier.end());
  std::sort(leaves.begin(), leaves.end(),
            [](const LeafValue& a, const LeafValue& b) { return a.node < b.node; });
  map.leaves = std::move(leaves);
  map.evaluation_count = evals;
  return map;
}

SrpdMap higrid_run(const ShdFrame& frame, const CdCache& cache, const RefinementPolicy& policy,
                   double r_a) {
  if (frame.is_zero()) {
    SrpdMap map;
    map.l_max = policy.l_max;
    map.silent = true;
    for (std::int64_t p = 0; p < 48; ++p) map.leaves.push_back({{1, p}, 0.0});
    map.directions_per_level.assign(policy.l_max, map.leaves.size());
    return map;
  }
  return higrid_run(steering_vector(frame, r_a), cache, policy);
}

}  // namespace higrid
