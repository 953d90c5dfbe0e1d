#include "higrid/healpix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace higrid {
namespace {

// ring offsets of the 12 base faces
constexpr int kJrll[12] = {2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4};
constexpr int kJpll[12] = {1, 3, 5, 7, 0, 2, 4, 6, 1, 3, 5, 7};

std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0xffffffffULL;
  v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
  v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v << 2)) & 0x3333333333333333ULL;
  v = (v | (v << 1)) & 0x5555555555555555ULL;
  return v;
}

std::uint64_t compress_bits(std::uint64_t v) {
  v &= 0x5555555555555555ULL;
  v = (v | (v >> 1)) & 0x3333333333333333ULL;
  v = (v | (v >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v >> 4)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v >> 8)) & 0x0000ffff0000ffffULL;
  v = (v | (v >> 16)) & 0x00000000ffffffffULL;
  return v;
}

struct Xyf {
  int ix, iy, face;
};

std::int64_t xyf2nest(int ix, int iy, int face, int level) {
  return (static_cast<std::int64_t>(face) << (2 * level)) +
         static_cast<std::int64_t>(spread_bits(ix) | (spread_bits(iy) << 1));
}

Xyf nest2xyf(std::int64_t pix, int level) {
  Xyf r;
  r.face = static_cast<int>(pix >> (2 * level));
  std::uint64_t p = static_cast<std::uint64_t>(pix) & ((1ULL << (2 * level)) - 1);
  r.ix = static_cast<int>(compress_bits(p));
  r.iy = static_cast<int>(compress_bits(p >> 1));
  return r;
}

void check_node(const HealpixNode& n) {
  if (n.level < 0 || n.index < 0 || n.index >= pixel_count(n.level))
    throw std::out_of_range("healpix: node index out of range for level");
}

}  // namespace

std::int64_t pixel_count(int level) {
  if (level < 0) throw std::domain_error("healpix: negative level");
  return 12LL << (2 * level);
}

double pix_area(int level) { return kFourPi / static_cast<double>(pixel_count(level)); }

double angular_resolution(int level) {
  return std::sqrt(3.0 / kPi) * kPi / (3.0 * static_cast<double>(1LL << level));
}

std::array<HealpixNode, 4> children(const HealpixNode& node) {
  check_node(node);
  std::array<HealpixNode, 4> out;
  for (int k = 0; k < 4; ++k) out[k] = {node.level + 1, 4 * node.index + k};
  return out;
}

HealpixNode parent(const HealpixNode& node) {
  check_node(node);
  if (node.level == 0) throw std::domain_error("healpix: level-0 pixel has no parent");
  return {node.level - 1, node.index >> 2};
}

std::pair<double, double> pix_center(const HealpixNode& node) {
  check_node(node);
  const int level = node.level;
  const std::int64_t nside = 1LL << level;
  Xyf c = nest2xyf(node.index, level);

  // ring number counted from the north pole, 1 .. 4*nside-1
  std::int64_t jr = kJrll[c.face] * nside - c.ix - c.iy - 1;
  std::int64_t nr;
  double z;
  int kshift;
  if (jr < nside) {  // north polar cap
    nr = jr;
    z = 1.0 - static_cast<double>(jr * jr) / (3.0 * static_cast<double>(nside * nside));
    kshift = 0;
  } else if (jr > 3 * nside) {  // south polar cap
    nr = 4 * nside - jr;
    z = -1.0 + static_cast<double>(nr * nr) / (3.0 * static_cast<double>(nside * nside));
    kshift = 0;
  } else {  // equatorial belt
    nr = nside;
    z = static_cast<double>(2 * nside - jr) * 2.0 / (3.0 * static_cast<double>(nside));
    kshift = static_cast<int>((jr - nside) & 1);
  }

  std::int64_t jp = (kJpll[c.face] * nr + c.ix - c.iy + 1 + kshift) / 2;
  if (jp > 4 * nr) jp -= 4 * nr;
  if (jp < 1) jp += 4 * nr;

  double theta = std::acos(z);
  double phi = (static_cast<double>(jp) - (kshift + 1) * 0.5) * (kPi / 2.0) / static_cast<double>(nr);
  return {theta, phi};
}

Vec3 pix_center_vec(const HealpixNode& node) {
  auto [theta, phi] = pix_center(node);
  return unit_vector(theta, phi);
}

HealpixNode pix_containing(int level, double theta, double phi) {
  if (level < 0) throw std::domain_error("healpix: negative level");
  if (!(theta >= 0.0 && theta <= kPi)) throw std::domain_error("healpix: theta outside [0,pi]");
  const std::int64_t nside = 1LL << level;
  const double z = std::cos(theta);
  const double za = std::fabs(z);
  double tt = std::fmod(phi / (kPi / 2.0), 4.0);
  if (tt < 0.0) tt += 4.0;

  int ix, iy, face;
  if (za <= 2.0 / 3.0) {
    const double temp1 = nside * (0.5 + tt);
    const double temp2 = nside * (z * 0.75);
    std::int64_t jp = static_cast<std::int64_t>(temp1 - temp2);  // ascending edge line
    std::int64_t jm = static_cast<std::int64_t>(temp1 + temp2);  // descending edge line
    std::int64_t ifp = jp >> level;
    std::int64_t ifm = jm >> level;
    if (ifp == ifm)
      face = static_cast<int>(ifp | 4);
    else if (ifp < ifm)
      face = static_cast<int>(ifp);
    else
      face = static_cast<int>(ifm + 8);
    ix = static_cast<int>(jm & (nside - 1));
    iy = static_cast<int>(nside - (jp & (nside - 1)) - 1);
  } else {
    const int ntt = std::min(3, static_cast<int>(tt));
    const double tp = tt - ntt;
    const double tmp = nside * std::sqrt(3.0 * (1.0 - za));
    std::int64_t jp = std::min<std::int64_t>(static_cast<std::int64_t>(tp * tmp), nside - 1);
    std::int64_t jm = std::min<std::int64_t>(static_cast<std::int64_t>((1.0 - tp) * tmp), nside - 1);
    if (z >= 0) {
      face = ntt;
      ix = static_cast<int>(nside - jm - 1);
      iy = static_cast<int>(nside - jp - 1);
    } else {
      face = ntt + 8;
      ix = static_cast<int>(jp);
      iy = static_cast<int>(jm);
    }
  }
  return {level, xyf2nest(ix, iy, face, level)};
}

namespace {

constexpr int kXOff[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kYOff[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kFaceArray[9][12] = {
    {8, 9, 10, 11, -1, -1, -1, -1, 10, 11, 8, 9},    // S
    {5, 6, 7, 4, 8, 9, 10, 11, 9, 10, 11, 8},        // SE
    {-1, -1, -1, -1, 5, 6, 7, 4, -1, -1, -1, -1},    // E
    {4, 5, 6, 7, 11, 8, 9, 10, 11, 8, 9, 10},        // SW
    {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},          // center
    {1, 2, 3, 0, 0, 1, 2, 3, 5, 6, 7, 4},            // NE
    {-1, -1, -1, -1, 7, 4, 5, 6, -1, -1, -1, -1},    // W
    {3, 0, 1, 2, 3, 0, 1, 2, 4, 5, 6, 7},            // NW
    {2, 3, 0, 1, -1, -1, -1, -1, 0, 1, 2, 3}};       // N
constexpr int kSwapArray[9][12] = {
    {0, 0, 0, 0, 0, 0, 0, 0, 3, 3, 3, 3},  // S
    {0, 0, 0, 0, 0, 0, 0, 0, 6, 6, 6, 6},  // SE
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // E
    {0, 0, 0, 0, 0, 0, 0, 0, 5, 5, 5, 5},  // SW
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // center
    {5, 5, 5, 5, 0, 0, 0, 0, 0, 0, 0, 0},  // NE
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // W
    {6, 6, 6, 6, 0, 0, 0, 0, 0, 0, 0, 0},  // NW
    {3, 3, 3, 3, 0, 0, 0, 0, 0, 0, 0, 0}}; // N

}  // namespace

std::vector<HealpixNode> neighbors(const HealpixNode& node) {
  check_node(node);
  const int level = node.level;
  const int nside = 1 << level;
  Xyf c = nest2xyf(node.index, level);

  std::vector<HealpixNode> out;
  out.reserve(8);
  for (int i = 0; i < 8; ++i) {
    int x = c.ix + kXOff[i];
    int y = c.iy + kYOff[i];
    int nbnum = 4;
    if (x < 0) {
      x += nside;
      nbnum -= 1;
    } else if (x >= nside) {
      x -= nside;
      nbnum += 1;
    }
    if (y < 0) {
      y += nside;
      nbnum -= 3;
    } else if (y >= nside) {
      y -= nside;
      nbnum += 3;
    }
    if (nbnum == 4) {
      out.push_back({level, xyf2nest(x, y, c.face, level)});
      continue;
    }
    int f = kFaceArray[nbnum][c.face];
    if (f < 0) continue;  // three-face corner, no diagonal neighbor there
    int bits = kSwapArray[nbnum][c.face];
    if (bits & 1) x = nside - x - 1;
    if (bits & 2) y = nside - y - 1;
    if (bits & 4) std::swap(x, y);
    out.push_back({level, xyf2nest(x, y, f, level)});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace higrid
