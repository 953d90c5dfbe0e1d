#include "higrid/srpd.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace higrid {
namespace {

// Mean of y y^H over the descendant centers of `node` at the given level.
Eigen::MatrixXcd gram_over_pixel(const HealpixNode& node, int order, int point_level) {
  const int nsh = static_cast<int>(sh_count(order));
  const int depth = point_level - node.level;
  const std::int64_t first = node.index << (2 * depth);
  const std::int64_t count = 1LL << (2 * depth);

  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(nsh, nsh);
  std::vector<cplx> y(nsh);
  for (std::int64_t p = first; p < first + count; ++p) {
    auto [theta, phi] = pix_center({point_level, p});
    sph_harmonics_all(order, theta, phi, y.data());
    // accumulate the upper triangle of y y^H
    for (int j = 0; j < nsh; ++j)
      for (int k = j; k < nsh; ++k) q(j, k) += y[j] * std::conj(y[k]);
  }
  q /= static_cast<double>(count);
  for (int j = 0; j < nsh; ++j)
    for (int k = 0; k < j; ++k) q(j, k) = std::conj(q(k, j));
  return q;
}

void decompose(CrossDensity& cd) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cd.q.transpose());
  if (es.info() != Eigen::Success)
    throw NumericalError("srpd: eigendecomposition failed");
  const int nsh = static_cast<int>(cd.q.rows());
  // Eigen returns ascending order; flip to descending.
  cd.eigvals = es.eigenvalues().reverse();
  cd.eigvecs = es.eigenvectors().rowwise().reverse();
  double total = cd.eigvals.array().square().sum();
  double run = 0.0;
  cd.retained = nsh;
  for (int m = 0; m < nsh; ++m) {
    run += cd.eigvals[m] * cd.eigvals[m];
    if (run >= cd.energy_threshold * total) {
      cd.retained = m + 1;
      break;
    }
  }
}

}  // namespace

CrossDensity cross_density(const HealpixNode& node, int order, int sub_depth,
                           double energy_threshold) {
  if (order > 6) throw std::domain_error("srpd: order > 6 unsupported");
  if (sub_depth < 2) throw std::domain_error("srpd: sub_depth must be >= 2");
  CrossDensity cd;
  cd.node = node;
  cd.energy_threshold = energy_threshold;
  cd.q = gram_over_pixel(node, order, node.level + sub_depth);
  decompose(cd);
  return cd;
}

SteeringVector steering_vector(const ShdFrame& frame, double r_a) {
  std::vector<cplx> b = mode_strengths(frame.order, frame.k, r_a);
  SteeringVector sv;
  sv.p.resize(static_cast<Eigen::Index>(sh_count(frame.order)));
  for (int n = 0; n <= frame.order; ++n) {
    cplx denom = kFourPi * std::pow(cplx{0.0, 1.0}, n) * b[n];
    for (int m = -n; m <= n; ++m) {
      std::size_t i = sh_index(n, m);
      sv.p[static_cast<Eigen::Index>(i)] = frame.coeffs[i] / denom;
    }
  }
  return sv;
}

namespace {

double eval_components(const SteeringVector& sv, const CrossDensity& cd, int m_count) {
  if (sv.p.size() != cd.eigvecs.rows())
    throw std::invalid_argument("srpd: steering vector / cross density size mismatch");
  double acc = 0.0;
  for (int m = 0; m < m_count; ++m) {
    cplx proj = cd.eigvecs.col(m).adjoint() * sv.p;
    acc += cd.eigvals[m] * std::norm(proj);
  }
  return acc < 0.0 ? 0.0 : acc;
}

}  // namespace

double srpd_eval(const SteeringVector& sv, const CrossDensity& cd) {
  return eval_components(sv, cd, cd.retained);
}

double srpd_eval_full(const SteeringVector& sv, const CrossDensity& cd) {
  return eval_components(sv, cd, static_cast<int>(cd.eigvals.size()));
}

CdCache CdCache::build(int l_max, int order, int sub_depth, double energy_threshold, int jobs) {
  if (l_max < 0 || l_max > 6) throw std::domain_error("srpd: cache l_max must be in 0..6");
  if (order > 6) throw std::domain_error("srpd: order > 6 unsupported");
  if (sub_depth < 2) throw std::domain_error("srpd: sub_depth must be >= 2");

  CdCache cache;
  cache.l_max_ = l_max;
  cache.order_ = order;
  cache.sub_depth_ = sub_depth;
  cache.threshold_ = energy_threshold;
  cache.levels_.resize(l_max + 1);
  for (int l = 0; l <= l_max; ++l) cache.levels_[l].resize(pixel_count(l));

  // Quadrature anchored at l_max + sub_depth: evaluate the deepest level
  // directly, then average children upward (exact in the quadrature).
  const int point_level = l_max + sub_depth;
  auto& deepest = cache.levels_[l_max];
  parallel_for(deepest.size(), jobs, [&](std::size_t p) {
    CrossDensity& cd = deepest[p];
    cd.node = {l_max, static_cast<std::int64_t>(p)};
    cd.energy_threshold = energy_threshold;
    cd.q = gram_over_pixel(cd.node, order, point_level);
  });
  for (int l = l_max - 1; l >= 0; --l) {
    auto& lv = cache.levels_[l];
    const auto& ch = cache.levels_[l + 1];
    parallel_for(lv.size(), jobs, [&](std::size_t p) {
      CrossDensity& cd = lv[p];
      cd.node = {l, static_cast<std::int64_t>(p)};
      cd.energy_threshold = energy_threshold;
      cd.q = 0.25 * (ch[4 * p].q + ch[4 * p + 1].q + ch[4 * p + 2].q + ch[4 * p + 3].q);
    });
  }
  for (int l = 0; l <= l_max; ++l) {
    auto& lv = cache.levels_[l];
    parallel_for(lv.size(), jobs, [&](std::size_t p) { decompose(lv[p]); });
  }
  return cache;
}

const CrossDensity& CdCache::at(const HealpixNode& node) const {
  if (node.level < 0 || node.level > l_max_ || node.index < 0 ||
      node.index >= static_cast<std::int64_t>(levels_[node.level].size()))
    throw std::out_of_range("srpd: node outside cache");
  return levels_[node.level][node.index];
}

std::size_t CdCache::size() const {
  std::size_t n = 0;
  for (const auto& lv : levels_) n += lv.size();
  return n;
}

namespace {

constexpr char kMagic[8] = {'H', 'G', 'C', 'D', '0', '0', '0', '1'};

template <typename T>
void put(std::vector<unsigned char>& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  // fixed little-endian layout
  if constexpr (sizeof(T) > 1) {
    unsigned one = 1;
    if (*reinterpret_cast<unsigned char*>(&one) == 0)
      std::reverse(b, b + sizeof(T));
  }
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get(const unsigned char*& p, const unsigned char* end) {
  if (p + sizeof(T) > end) throw std::runtime_error("srpd: truncated cache file");
  T v;
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (sizeof(T) > 1) {
    unsigned one = 1;
    if (*reinterpret_cast<unsigned char*>(&one) == 0)
      std::reverse(b, b + sizeof(T));
  }
  std::memcpy(&v, b, sizeof(T));
  p += sizeof(T);
  return v;
}

}  // namespace

std::vector<unsigned char> CdCache::serialize() const {
  std::vector<unsigned char> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  put<std::int32_t>(out, order_);
  put<std::int32_t>(out, l_max_);
  put<std::int32_t>(out, sub_depth_);
  put<double>(out, threshold_);
  const int nsh = static_cast<int>(sh_count(order_));
  for (int l = 0; l <= l_max_; ++l) {
    for (const CrossDensity& cd : levels_[l]) {
      put<std::int32_t>(out, cd.retained);
      for (int m = 0; m < nsh; ++m) put<double>(out, cd.eigvals[m]);
      for (int k = 0; k < nsh; ++k)
        for (int j = 0; j < nsh; ++j) {
          put<double>(out, cd.eigvecs(j, k).real());
          put<double>(out, cd.eigvecs(j, k).imag());
        }
    }
  }
  return out;
}

void CdCache::save(const std::string& path) const {
  auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("srpd: cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("srpd: short write to " + path);
}

CdCache CdCache::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("srpd: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const unsigned char* p = bytes.data();
  const unsigned char* end = p + bytes.size();
  if (bytes.size() < 8 || std::memcmp(p, kMagic, 8) != 0)
    throw std::runtime_error("srpd: bad cache file magic");
  p += 8;

  CdCache cache;
  cache.order_ = get<std::int32_t>(p, end);
  cache.l_max_ = get<std::int32_t>(p, end);
  cache.sub_depth_ = get<std::int32_t>(p, end);
  cache.threshold_ = get<double>(p, end);
  const int nsh = static_cast<int>(sh_count(cache.order_));
  cache.levels_.resize(cache.l_max_ + 1);
  for (int l = 0; l <= cache.l_max_; ++l) {
    cache.levels_[l].resize(pixel_count(l));
    for (std::int64_t m = 0; m < pixel_count(l); ++m) {
      CrossDensity& cd = cache.levels_[l][m];
      cd.node = {l, m};
      cd.energy_threshold = cache.threshold_;
      cd.retained = get<std::int32_t>(p, end);
      cd.eigvals.resize(nsh);
      for (int i = 0; i < nsh; ++i) cd.eigvals[i] = get<double>(p, end);
      cd.eigvecs.resize(nsh, nsh);
      for (int k = 0; k < nsh; ++k)
        for (int j = 0; j < nsh; ++j) {
          double re = get<double>(p, end);
          double im = get<double>(p, end);
          cd.eigvecs(j, k) = {re, im};
        }
    }
  }
  if (p != end) throw std::runtime_error("srpd: trailing bytes in cache file");
  return cache;
}

}  // namespace higrid
