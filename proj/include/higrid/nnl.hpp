#pragma once

#include <vector>

#include "higrid/higrid.hpp"

namespace higrid {

/// A connected region of above-threshold leaves at the highest resolution
/// level of an SRPD map.
struct Cluster {
  std::vector<HealpixNode> members;  // sorted
  Vec3 centroid;                     // unit vector
  double mass = 0.0;                 // sum of member SRPD values
};

/// Mean of all leaf values of the map (all levels). Throws on an empty map.
double map_threshold(const SrpdMap& map);

/// Neighboring-nodes labelling: removes leaves with value < threshold, keeps
/// the survivors at level map.l_max only, and grows clusters through the
/// neighbor relation (wrapping over phi = 0/2pi and the poles). Clusters with
/// fewer than min_members pixels are discarded. Centroids are the
/// value-weighted (or plain, when weighted = false) mean of the member pixel
/// center vectors, normalized.
std::vector<Cluster> nnl_label(const SrpdMap& map, bool weighted = true, int min_members = 1);

/// Centroid of an explicit member set against the map values.
Vec3 cluster_centroid(const std::vector<HealpixNode>& members, const SrpdMap& map,
                      bool weighted = true);

}  // namespace higrid
