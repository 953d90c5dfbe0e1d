#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "higrid/nnl.hpp"
#include "oracles.hpp"

using namespace higrid;

namespace {

SrpdMap uniform_map(int level, double value) {
  SrpdMap m;
  m.l_max = level;
  for (std::int64_t p = 0; p < pixel_count(level); ++p) m.leaves.push_back({{level, p}, value});
  return m;
}

}  // namespace

TEST_CASE("threshold is the plain mean of all leaves") {
  SrpdMap m;
  m.l_max = 1;
  m.leaves = {{{1, 0}, 1.0}, {{1, 1}, 2.0}, {{1, 2}, 3.0}, {{1, 3}, 4.0}};
  CHECK(map_threshold(m) == doctest::Approx(2.5));
  SrpdMap empty;
  CHECK_THROWS_AS(map_threshold(empty), std::invalid_argument);
}

TEST_CASE("uniform map: strict removal keeps every leaf") {
  SrpdMap m = uniform_map(1, 0.7);
  auto clusters = nnl_label(m);
  std::size_t total = 0;
  for (const auto& c : clusters) total += c.members.size();
  CHECK(total == 48);  // nothing removed; the sphere is one connected region
  CHECK(clusters.size() == 1);
}

TEST_CASE("one bright pixel in a dark map forms one singleton cluster") {
  SrpdMap m = uniform_map(3, 1e-6);
  m.leaves[100].value = 5.0;
  auto clusters = nnl_label(m);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].members.size() == 1);
  CHECK(clusters[0].members[0] == HealpixNode{3, 100});
  CHECK(angle_between(clusters[0].centroid, pix_center_vec({3, 100})) < 1e-12);
}

TEST_CASE("two separated bright regions form two clusters") {
  SrpdMap m = uniform_map(3, 1e-6);
  // two antipodal-ish blobs
  HealpixNode a = pix_containing(3, 0.4, 1.0);
  HealpixNode b = pix_containing(3, 2.6, 4.0);
  for (const auto& n : {a, b}) {
    for (auto& lf : m.leaves)
      if (lf.node == n) lf.value = 10.0;
    for (const auto& q : neighbors(n))
      for (auto& lf : m.leaves)
        if (lf.node == q) lf.value = 8.0;
  }
  auto clusters = nnl_label(m);
  CHECK(clusters.size() == 2);
}

TEST_CASE("a bright band across the azimuth seam stays one cluster") {
  SrpdMap m = uniform_map(3, 1e-9);
  int marked = 0;
  for (auto& lf : m.leaves) {
    auto [theta, phi] = pix_center(lf.node);
    double dphi = std::min(phi, kTwoPi - phi);  // distance to the seam
    if (std::fabs(theta - kPi / 2) < 0.12 && dphi < 0.35) {
      lf.value = 1.0;
      ++marked;
    }
  }
  REQUIRE(marked >= 6);
  auto clusters = nnl_label(m);
  REQUIRE(clusters.size() == 1);
  CHECK(static_cast<int>(clusters[0].members.size()) == marked);
  // and the band genuinely spans the seam
  bool left = false, right = false;
  for (const auto& n : clusters[0].members) {
    auto [theta, phi] = pix_center(n);
    (void)theta;
    if (phi < kPi) right = true;
    else left = true;
  }
  CHECK(left);
  CHECK(right);
}

TEST_CASE("memberships equal union-find components on random thresholded maps") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uv(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int level = 2;
    SrpdMap m = uniform_map(level, 0.0);
    for (auto& lf : m.leaves) lf.value = uv(rng) < 0.45 ? uv(rng) * 10.0 : 0.01 * uv(rng);

    auto clusters = nnl_label(m);

    // oracle: connected components over the survivors via union-find
    const double thr = map_threshold(m);
    std::vector<std::int64_t> survivors;
    for (const auto& lf : m.leaves)
      if (!(lf.value < thr)) survivors.push_back(lf.node.index);
    std::map<std::int64_t, int> id;
    for (std::size_t i = 0; i < survivors.size(); ++i) id[survivors[i]] = static_cast<int>(i);
    oracles::UnionFind uf(static_cast<int>(survivors.size()));
    for (std::int64_t p : survivors)
      for (const auto& q : neighbors({level, p}))
        if (id.count(q.index)) uf.unite(id[p], id[q.index]);

    std::map<int, std::set<std::int64_t>> comps;
    for (std::int64_t p : survivors) comps[uf.find(id[p])].insert(p);

    REQUIRE(clusters.size() == comps.size());
    std::set<std::set<std::int64_t>> got, want;
    for (const auto& c : clusters) {
      std::set<std::int64_t> s;
      for (const auto& n : c.members) s.insert(n.index);
      got.insert(s);
    }
    for (const auto& [root, s] : comps) want.insert(s);
    CHECK(got == want);
  }
}

TEST_CASE("cluster labels are invariant to global scaling") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> uv(0.0, 1.0);
  SrpdMap m = uniform_map(2, 0.0);
  for (auto& lf : m.leaves) lf.value = uv(rng);
  auto base = nnl_label(m);
  SrpdMap scaled = m;
  for (auto& lf : scaled.leaves) lf.value *= 737.5;
  auto big = nnl_label(scaled);
  REQUIRE(base.size() == big.size());
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i].members == big[i].members);
}

TEST_CASE("clusters partition the surviving deepest leaves") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uv(0.0, 1.0);
  SrpdMap m = uniform_map(2, 0.0);
  for (auto& lf : m.leaves) lf.value = uv(rng);
  const double thr = map_threshold(m);
  std::set<std::int64_t> survivors;
  for (const auto& lf : m.leaves)
    if (!(lf.value < thr)) survivors.insert(lf.node.index);
  std::set<std::int64_t> covered;
  for (const auto& c : nnl_label(m))
    for (const auto& n : c.members) {
      CHECK(covered.count(n.index) == 0);
      covered.insert(n.index);
    }
  CHECK(covered == survivors);
}

TEST_CASE("weighted centroid of two symmetric pixels lies on the bisector") {
  SrpdMap m = uniform_map(3, 1e-9);
  // two edge-neighbor pixels with equal weight
  HealpixNode a = pix_containing(3, 1.1, 2.0);
  HealpixNode b = neighbors(a).front();
  for (auto& lf : m.leaves)
    if (lf.node == a || lf.node == b) lf.value = 3.0;
  auto clusters = nnl_label(m);
  REQUIRE(clusters.size() == 1);
  Vec3 ca = pix_center_vec(a), cb = pix_center_vec(b);
  Vec3 diff{ca.x - cb.x, ca.y - cb.y, ca.z - cb.z};
  CHECK(std::fabs(clusters[0].centroid.dot(diff)) < 1e-12);
  CHECK(clusters[0].centroid.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unweighted centroid mode and the minimum-size filter") {
  SrpdMap m = uniform_map(3, 1e-9);
  HealpixNode a = pix_containing(3, 1.3, 0.4);
  HealpixNode b = neighbors(a).front();
  for (auto& lf : m.leaves) {
    if (lf.node == a) lf.value = 9.0;
    if (lf.node == b) lf.value = 1.0;
  }
  auto weighted = nnl_label(m, true);
  auto unweighted = nnl_label(m, false);
  REQUIRE(weighted.size() == 1);
  REQUIRE(unweighted.size() == 1);
  // the weighted centroid leans toward the heavy pixel
  CHECK(angle_between(weighted[0].centroid, pix_center_vec(a)) <
        angle_between(unweighted[0].centroid, pix_center_vec(a)));

  auto filtered = nnl_label(m, true, 3);
  CHECK(filtered.empty());
}

TEST_CASE("no survivors at the deepest level yields no clusters") {
  // bright region exists only at a coarser level
  SrpdMap m;
  m.l_max = 3;
  for (std::int64_t p = 0; p < pixel_count(2); ++p) m.leaves.push_back({{2, p}, 0.001});
  m.leaves[10].value = 50.0;
  CHECK(nnl_label(m).empty());
}
