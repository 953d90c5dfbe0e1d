#pragma once

#include <complex>
#include <span>
#include <vector>

#include "higrid/util.hpp"

namespace higrid {

using cplx = std::complex<double>;

/// Flat index of coefficient (n,m) in the (n,m)-lexicographic order
/// (0,0),(1,-1),(1,0),(1,1),... : n*n + n + m.
inline std::size_t sh_index(int n, int m) { return static_cast<std::size_t>(n * n + n + m); }
inline std::size_t sh_count(int order) { return static_cast<std::size_t>((order + 1) * (order + 1)); }

/// Associated Legendre function P_n^m(x) with the Condon-Shortley phase.
double assoc_legendre(int n, int m, double x);

/// Orthonormal complex spherical harmonic Y_n^m(theta, phi).
cplx sph_harmonic(int n, int m, double theta, double phi);

/// All Y_n^m for n <= order at one direction, in sh_index order.
std::vector<cplx> sph_harmonics_all(int order, double theta, double phi);
void sph_harmonics_all(int order, double theta, double phi, cplx* out);

double sph_bessel_j(int n, double x);
double sph_bessel_y(int n, double x);
double sph_bessel_j_deriv(int n, double x);
cplx sph_hankel2(int n, double x);
cplx sph_hankel2_deriv(int n, double x);

/// Rigid-sphere mode strength
///   b_n(kr) = j_n(kr) - [j_n'(k r_a) / h2_n'(k r_a)] h2_n(kr),
/// derivatives with respect to the argument. Requires r >= r_a > 0.
cplx mode_strength(int n, double k, double r, double r_a);

/// b_0..b_order at r = r_a, with a conditioning floor: throws
/// IllConditionedError if any |b_n| < floor_rel * max_n |b_n|.
std::vector<cplx> mode_strengths(int order, double k, double r_a, double floor_rel = 1e-8);

/// Spherical harmonic coefficients of one time-frequency bin.
struct ShdFrame {
  int order = 0;
  double k = 0.0;  // wavenumber, 1/m
  std::vector<cplx> coeffs;  // (order+1)^2, sh_index order

  bool is_zero(double eps = 0.0) const;
};

struct PlaneWaveSource {
  cplx amplitude;
  double theta = 0.0;
  double phi = 0.0;
};

/// Quadrature weight/position of one microphone on the rigid sphere.
struct Mic {
  double theta = 0.0;
  double phi = 0.0;
  double weight = 0.0;
};

struct ArrayGeometry;  // geometry.hpp

/// SHD by discrete quadrature: coeffs[n,m] = sum_q w_q p_q conj(Y_n^m(q)).
ShdFrame shd_from_mics(std::span<const cplx> pressures, const ArrayGeometry& geom, double k);

/// Order-limited coefficients of a sum of plane waves on the rigid sphere:
///   coeffs[n,m] = 4 pi i^n b_n(k r_a) sum_s alpha_s conj(Y_n^m(theta_s, phi_s)).
ShdFrame plane_wave_shd(std::span<const PlaneWaveSource> sources, double k, int order, double r_a);

/// Steered response power |y_N(theta,phi)|^2 with
///   y_N = sum_{n,m} p_nm / (4 pi i^n b_n(k r_a)) Y_n^m(theta, phi).
double srp_pwd(const ShdFrame& frame, double theta, double phi, double r_a);

/// Axisymmetric pattern of the order-limited beam steered at angular
/// distance big_theta from a unit plane wave:
///   (N+1)/(4pi) * [P_{N+1}(c) - P_N(c)] / [P_1(c) - P_0(c)], c = cos(big_theta).
double regular_beam(int order, double big_theta);

}  // namespace higrid
