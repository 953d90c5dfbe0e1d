#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "higrid/srpd.hpp"

namespace higrid {

struct LeafValue {
  HealpixNode node;
  double value = 0.0;
};

/// Multiresolution SRPD map: the leaf partition of the refinement quadtree
/// with the SRPD evaluated on every leaf.
struct SrpdMap {
  std::vector<LeafValue> leaves;  // sorted by (level, index)
  int l_max = 0;
  std::uint64_t bin_frame = 0;  // tau of the bin the map belongs to
  std::uint64_t bin_freq = 0;   // kappa
  std::size_t evaluation_count = 0;           // total srpd_eval calls
  std::vector<std::size_t> directions_per_level;  // leaf count after each stage 1..l_max
  bool silent = false;  // all-zero frame, map is a flagged placeholder
};

struct RefinementPolicy {
  int l_max = 3;
  std::uint64_t rng_seed = 0;
};

/// Total spatial entropy of a leaf set:
///   H = -sum_i gamma_i log(gamma_i / A_i),  gamma_i = P_i / sum_j P_j
/// (natural log; may be negative). Throws std::domain_error when every value
/// is zero.
double spatial_entropy(std::span<const LeafValue> leaves);

/// Entropy drop when `leaf` (a member of `leaves`) is replaced by its four
/// children carrying `child_values`. Computed incrementally; identical to two
/// full entropy evaluations.
double info_gain(std::span<const LeafValue> leaves, const HealpixNode& leaf,
                 const std::array<double, 4>& child_values);

/// Entropy-guided refinement of the SRPD map for one SHD frame.
///
/// Starts from the 12 base pixels and works one level at a time: the frontier
/// (the leaves created by the previous stage) is visited in seeded random
/// order; each visit evaluates the four children and accepts the refinement
/// iff it lowers the spatial entropy of the frontier set, otherwise the
/// branch is pruned. Runs against a cross-density cache covering levels
/// 0..policy.l_max.
SrpdMap higrid_run(const ShdFrame& frame, const CdCache& cache, const RefinementPolicy& policy,
                   double r_a);

/// Same, for a precomputed steering vector.
SrpdMap higrid_run(const SteeringVector& sv, const CdCache& cache, const RefinementPolicy& policy);

}  // namespace higrid
