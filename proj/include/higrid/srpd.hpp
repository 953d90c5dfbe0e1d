#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "higrid/healpix.hpp"
#include "higrid/sph.hpp"

namespace higrid {

/// Cross spatial density of one pixel: the area-normalized Gram matrix of the
/// spherical harmonics over the pixel region,
///   Q[j][k] = (1/A_i) \int_{S_i} Y_j conj(Y_k) dS,
/// together with the eigendecomposition of Q^T truncated at the smallest M
/// whose squared-eigenvalue energy ratio reaches `energy_threshold`.
struct CrossDensity {
  HealpixNode node;
  Eigen::MatrixXcd q;         // Hermitian (order+1)^2 square; may be empty when loaded from disk
  Eigen::VectorXd eigvals;    // of q^T, descending
  Eigen::MatrixXcd eigvecs;   // columns, matching eigvals
  int retained = 0;           // M
  double energy_threshold = 0.99;
};

/// Builds the cross density of `node` by equal-weight quadrature over the
/// 4^sub_depth descendant pixel centers at level node.level + sub_depth.
CrossDensity cross_density(const HealpixNode& node, int order, int sub_depth = 4,
                           double energy_threshold = 0.99);

/// Frequency-dependent part of the SRPD functional:
///   p[n,m] = coeffs[n,m] / (4 pi i^n b_n(k r_a)).
struct SteeringVector {
  Eigen::VectorXcd p;
};

SteeringVector steering_vector(const ShdFrame& frame, double r_a);

/// SRPD of the pixel: sum over the retained components of
/// lambda_m |v_m^H p|^2. Clamped at zero against eigenvalue noise.
double srpd_eval(const SteeringVector& sv, const CrossDensity& cd);

/// Same with all (order+1)^2 components; equals the pixel average of |y_N|^2
/// up to the quadrature of the cross density.
double srpd_eval_full(const SteeringVector& sv, const CrossDensity& cd);

/// Cross densities for all pixels of levels 0..l_max. Quadrature points are
/// anchored at level l_max + sub_depth for every entry, so a parent matrix is
/// exactly the mean of its four children.
class CdCache {
 public:
  CdCache() = default;

  static CdCache build(int l_max, int order, int sub_depth = 4, double energy_threshold = 0.99,
                       int jobs = 1);

  const CrossDensity& at(const HealpixNode& node) const;
  int l_max() const { return l_max_; }
  int order() const { return order_; }
  int sub_depth() const { return sub_depth_; }
  double energy_threshold() const { return threshold_; }
  std::size_t size() const;

  /// Versioned little-endian binary serialization of the eigendecompositions
  /// (eigvals, eigvecs, M per node). Round trips bit-identically.
  void save(const std::string& path) const;
  static CdCache load(const std::string& path);
  std::vector<unsigned char> serialize() const;

 private:
  int l_max_ = -1;
  int order_ = 0;
  int sub_depth_ = 0;
  double threshold_ = 0.99;
  std::vector<std::vector<CrossDensity>> levels_;  // [level][index]
};

}  // namespace higrid
