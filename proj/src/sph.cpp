#include "higrid/sph.hpp"

#include <cmath>
#include <stdexcept>

#include "higrid/geometry.hpp"

namespace higrid {
namespace {

void check_nm(int n, int m) {
  if (n < 0 || std::abs(m) > n) throw std::domain_error("sph: invalid (n,m)");
}

// sqrt((2n+1)/(4pi) * (n-m)!/(n+m)!), m >= 0
double y_norm(int n, int m) {
  double ratio = 1.0;
  for (int k = n - m + 1; k <= n + m; ++k) ratio /= static_cast<double>(k);
  return std::sqrt((2.0 * n + 1.0) / kFourPi * ratio);
}

}  // namespace

double assoc_legendre(int n, int m, double x) {
  check_nm(n, m);
  if (m < 0) throw std::domain_error("sph: assoc_legendre expects m >= 0");
  if (std::fabs(x) > 1.0) throw std::domain_error("sph: assoc_legendre |x| > 1");

  // P_m^m, then raise n by the three-term recurrence.
  double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
  double pmm = 1.0;
  double fact = 1.0;
  for (int i = 0; i < m; ++i) {
    pmm *= -fact * somx2;  // Condon-Shortley phase
    fact += 2.0;
  }
  if (n == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (n == m + 1) return pmmp1;
  double pnm = 0.0;
  for (int nn = m + 2; nn <= n; ++nn) {
    pnm = (x * (2.0 * nn - 1.0) * pmmp1 - (nn + m - 1.0) * pmm) / (nn - m);
    pmm = pmmp1;
    pmmp1 = pnm;
  }
  return pnm;
}

cplx sph_harmonic(int n, int m, double theta, double phi) {
  check_nm(n, m);
  if (m < 0) {
    cplx y = sph_harmonic(n, -m, theta, phi);
    double sign = (m & 1) ? -1.0 : 1.0;
    return sign * std::conj(y);
  }
  double p = assoc_legendre(n, m, std::cos(theta));
  return y_norm(n, m) * p * std::polar(1.0, m * phi);
}

void sph_harmonics_all(int order, double theta, double phi, cplx* out) {
  const double x = std::cos(theta);
  const double somx2 = std::sqrt((1.0 - x) * (1.0 + x));

  // P_n^m for all 0 <= m <= n <= order, column-by-column in m
  double p_nm[2];  // rolling pair along n for the current m
  for (int m = 0; m <= order; ++m) {
    double pmm = 1.0;
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= -fact * somx2;
      fact += 2.0;
    }
    cplx e_imphi = std::polar(1.0, m * phi);
    p_nm[0] = pmm;
    p_nm[1] = x * (2.0 * m + 1.0) * pmm;
    for (int n = m; n <= order; ++n) {
      double p;
      if (n == m)
        p = p_nm[0];
      else if (n == m + 1)
        p = p_nm[1];
      else {
        p = (x * (2.0 * n - 1.0) * p_nm[1] - (n + m - 1.0) * p_nm[0]) / (n - m);
        p_nm[0] = p_nm[1];
        p_nm[1] = p;
      }
      cplx y = y_norm(n, m) * p * e_imphi;
      out[sh_index(n, m)] = y;
      if (m > 0) {
        double sign = (m & 1) ? -1.0 : 1.0;
        out[sh_index(n, -m)] = sign * std::conj(y);
      }
    }
  }
}

std::vector<cplx> sph_harmonics_all(int order, double theta, double phi) {
  std::vector<cplx> out(sh_count(order));
  sph_harmonics_all(order, theta, phi, out.data());
  return out;
}

double sph_bessel_j(int n, double x) { return std::sph_bessel(static_cast<unsigned>(n), x); }
double sph_bessel_y(int n, double x) { return std::sph_neumann(static_cast<unsigned>(n), x); }

double sph_bessel_j_deriv(int n, double x) {
  // f_n' = f_{n-1} - (n+1)/x f_n, with j_{-1}(x) = cos(x)/x
  double prev = (n == 0) ? std::cos(x) / x : sph_bessel_j(n - 1, x);
  return prev - (n + 1.0) / x * sph_bessel_j(n, x);
}

cplx sph_hankel2(int n, double x) { return {sph_bessel_j(n, x), -sph_bessel_y(n, x)}; }

cplx sph_hankel2_deriv(int n, double x) {
  double jp = sph_bessel_j_deriv(n, x);
  double yprev = (n == 0) ? std::sin(x) / x : sph_bessel_y(n - 1, x);
  double yp = yprev - (n + 1.0) / x * sph_bessel_y(n, x);
  return {jp, -yp};
}

cplx mode_strength(int n, double k, double r, double r_a) {
  if (n < 0) throw std::domain_error("sph: mode_strength order < 0");
  if (!(k > 0.0) || !(r_a > 0.0)) throw std::domain_error("sph: mode_strength needs k*r_a > 0");
  if (r < r_a) throw std::domain_error("sph: mode_strength needs r >= r_a");
  const double xa = k * r_a;
  const double xr = k * r;
  cplx h2p = sph_hankel2_deriv(n, xa);
  if (std::abs(h2p) < 1e-300)
    throw NumericalError("sph: spherical Hankel derivative underflow in mode strength");
  return sph_bessel_j(n, xr) - (sph_bessel_j_deriv(n, xa) / h2p) * sph_hankel2(n, xr);
}

std::vector<cplx> mode_strengths(int order, double k, double r_a, double floor_rel) {
  std::vector<cplx> b(order + 1);
  double bmax = 0.0;
  for (int n = 0; n <= order; ++n) {
    b[n] = mode_strength(n, k, r_a, r_a);
    bmax = std::max(bmax, std::abs(b[n]));
  }
  for (int n = 0; n <= order; ++n) {
    if (std::abs(b[n]) < floor_rel * bmax)
      throw IllConditionedError("sph: mode strength b_" + std::to_string(n) +
                                " below conditioning floor at k*r_a = " + std::to_string(k * r_a));
  }
  return b;
}

bool ShdFrame::is_zero(double eps) const {
  for (const auto& c : coeffs)
    if (std::abs(c) > eps) return false;
  return true;
}

ShdFrame shd_from_mics(std::span<const cplx> pressures, const ArrayGeometry& geom, double k) {
  if (pressures.size() != geom.mics.size())
    throw std::invalid_argument("shd_from_mics: pressure count does not match mic count");
  const int order = geom.max_order;
  ShdFrame frame{order, k, std::vector<cplx>(sh_count(order), cplx{0.0, 0.0})};
  std::vector<cplx> y(sh_count(order));
  for (std::size_t q = 0; q < geom.mics.size(); ++q) {
    const Mic& mic = geom.mics[q];
    sph_harmonics_all(order, mic.theta, mic.phi, y.data());
    const cplx wp = mic.weight * pressures[q];
    for (std::size_t i = 0; i < y.size(); ++i) frame.coeffs[i] += wp * std::conj(y[i]);
  }
  return frame;
}

ShdFrame plane_wave_shd(std::span<const PlaneWaveSource> sources, double k, int order, double r_a) {
  std::vector<cplx> b = mode_strengths(order, k, r_a);
  ShdFrame frame{order, k, std::vector<cplx>(sh_count(order), cplx{0.0, 0.0})};
  std::vector<cplx> y(sh_count(order));
  for (const auto& src : sources) {
    sph_harmonics_all(order, src.theta, src.phi, y.data());
    for (int n = 0; n <= order; ++n) {
      cplx fac = kFourPi * std::pow(cplx{0.0, 1.0}, n) * b[n] * src.amplitude;
      for (int m = -n; m <= n; ++m) {
        std::size_t i = sh_index(n, m);
        frame.coeffs[i] += fac * std::conj(y[i]);
      }
    }
  }
  return frame;
}

double srp_pwd(const ShdFrame& frame, double theta, double phi, double r_a) {
  std::vector<cplx> b = mode_strengths(frame.order, frame.k, r_a);
  std::vector<cplx> y(sh_count(frame.order));
  sph_harmonics_all(frame.order, theta, phi, y.data());
  cplx acc{0.0, 0.0};
  for (int n = 0; n <= frame.order; ++n) {
    cplx denom = kFourPi * std::pow(cplx{0.0, 1.0}, n) * b[n];
    for (int m = -n; m <= n; ++m) {
      std::size_t i = sh_index(n, m);
      acc += frame.coeffs[i] / denom * y[i];
    }
  }
  return std::norm(acc);
}

double regular_beam(int order, double big_theta) {
  const double c = std::cos(big_theta);
  if (std::fabs(1.0 - c) < 1e-12)
    return (order + 1.0) * (order + 1.0) / kFourPi;  // limit at the steering axis
  // Legendre polynomials up to order+1 by recurrence
  double p0 = 1.0, p1 = c;
  double pn = p1, pn1 = p1;  // P_order, P_{order+1}
  if (order == 0) {
    pn = p0;
    pn1 = p1;
  } else {
    for (int n = 2; n <= order + 1; ++n) {
      double p = ((2.0 * n - 1.0) * c * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = p;
    }
    pn = p0;
    pn1 = p1;
  }
  return (order + 1.0) / kFourPi * (pn1 - pn) / (c - 1.0);
}

}  // namespace higrid
