#include "higrid/nnl.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace higrid {

double map_threshold(const SrpdMap& map) {
  if (map.leaves.empty()) throw std::invalid_argument("nnl: empty map");
  double sum = 0.0;
  for (const LeafValue& lf : map.leaves) sum += lf.value;
  return sum / static_cast<double>(map.leaves.size());
}

Vec3 cluster_centroid(const std::vector<HealpixNode>& members, const SrpdMap& map,
                      bool weighted) {
  if (members.empty()) throw std::invalid_argument("nnl: empty cluster");
  std::map<HealpixNode, double> values;
  for (const LeafValue& lf : map.leaves) values[lf.node] = lf.value;
  Vec3 acc{0, 0, 0};
  double mass = 0.0;
  for (const HealpixNode& n : members) {
    auto it = values.find(n);
    if (it == values.end()) throw std::invalid_argument("nnl: cluster member not in map");
    double w = weighted ? it->second : 1.0;
    acc = acc + pix_center_vec(n) * w;
    mass += w;
  }
  if (!(mass > 0.0) || !(acc.norm() > 0.0))
    throw std::domain_error("nnl: zero-mass cluster has no centroid");
  return acc.normalized();
}

std::vector<Cluster> nnl_label(const SrpdMap& map, bool weighted, int min_members) {
  const double thr = map_threshold(map);

  // binarize, then keep the highest-resolution leaves
  std::map<HealpixNode, double> top;
  for (const LeafValue& lf : map.leaves)
    if (!(lf.value < thr) && lf.node.level == map.l_max) top[lf.node] = lf.value;

  std::set<HealpixNode> unvisited;
  for (const auto& [n, v] : top) unvisited.insert(n);

  std::vector<Cluster> out;
  while (!unvisited.empty()) {
    HealpixNode seed = *unvisited.begin();
    unvisited.erase(unvisited.begin());
    std::vector<HealpixNode> comp{seed};
    std::vector<HealpixNode> frontier{seed};
    while (!frontier.empty()) {
      std::vector<HealpixNode> grown;
      for (const HealpixNode& n : frontier) {
        for (const HealpixNode& nb : neighbors(n)) {
          auto it = unvisited.find(nb);
          if (it != unvisited.end()) {
            grown.push_back(nb);
            unvisited.erase(it);
          }
        }
      }
      comp.insert(comp.end(), grown.begin(), grown.end());
      frontier = std::move(grown);
    }
    if (static_cast<int>(comp.size()) < min_members) continue;
    std::sort(comp.begin(), comp.end());
    Cluster c;
    c.members = std::move(comp);
    double mass = 0.0;
    Vec3 acc{0, 0, 0};
    for (const HealpixNode& n : c.members) {
      double v = top[n];
      mass += v;
      acc = acc + pix_center_vec(n) * (weighted ? v : 1.0);
    }
    c.mass = mass;
    if (acc.norm() > 0.0)
      c.centroid = acc.normalized();
    else if (!c.members.empty())
      c.centroid = pix_center_vec(c.members.front());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
  return out;
}

}  // namespace higrid
