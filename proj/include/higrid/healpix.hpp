#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include "higrid/util.hpp"

namespace higrid {

/// One equal-area pixel of the nested-scheme hierarchical pixelization.
/// Level l has 12*4^l pixels; the children of (l,m) are (l+1, 4m+k).
struct HealpixNode {
  int level = 0;
  std::int64_t index = 0;

  auto operator<=>(const HealpixNode&) const = default;
};

std::int64_t pixel_count(int level);

/// Pixel area on the unit sphere, steradians: 4*pi / (12*4^level).
double pix_area(int level);

/// Mean angular spacing between pixel centers: sqrt(3/pi) * pi / (3*2^level).
double angular_resolution(int level);

std::array<HealpixNode, 4> children(const HealpixNode& node);

/// Parent of a node; level 0 has none (throws std::domain_error).
HealpixNode parent(const HealpixNode& node);

/// Center of the pixel as (theta, phi), theta in [0,pi], phi in [0,2pi).
std::pair<double, double> pix_center(const HealpixNode& node);
Vec3 pix_center_vec(const HealpixNode& node);

/// The level-`level` pixel containing (theta, phi). Boundary points resolve
/// deterministically through the floor arithmetic of the construction.
HealpixNode pix_containing(int level, double theta, double phi);

/// Edge- and corner-adjacent pixels at the same level (7 or 8 for level >= 1,
/// 6 at level 0). Wraps across phi=0/2pi and over both poles.
std::vector<HealpixNode> neighbors(const HealpixNode& node);

}  // namespace higrid
