// Independent oracles used by the test suites. Everything here is computed
// through a different route than the library (closed forms, series, brute
// force) so the checks do not share a failure mode with the implementation.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracles {

constexpr double kPi = 3.14159265358979323846;

// ---- associated Legendre, closed forms up to n = 4 (Condon-Shortley) ----

inline double legendre_closed(int n, int m, double x) {
  const double s = std::sqrt(1.0 - x * x);
  switch (n * 10 + m) {
    case 0: return 1.0;
    case 10: return x;
    case 11: return -s;
    case 20: return 0.5 * (3.0 * x * x - 1.0);
    case 21: return -3.0 * x * s;
    case 22: return 3.0 * (1.0 - x * x);
    case 30: return 0.5 * x * (5.0 * x * x - 3.0);
    case 31: return -1.5 * (5.0 * x * x - 1.0) * s;
    case 32: return 15.0 * x * (1.0 - x * x);
    case 33: return -15.0 * s * s * s;
    case 40: return 0.125 * (35.0 * x * x * x * x - 30.0 * x * x + 3.0);
    case 41: return -2.5 * (7.0 * x * x * x - 3.0 * x) * s;
    case 42: return 7.5 * (7.0 * x * x - 1.0) * (1.0 - x * x);
    case 43: return -105.0 * x * s * s * s;
    case 44: return 105.0 * (1.0 - x * x) * (1.0 - x * x);
    default: throw std::invalid_argument("legendre_closed: n > 4");
  }
}

// ---- Gauss-Legendre nodes and weights on [-1, 1] ----

struct GaussLegendre {
  std::vector<double> x, w;
};

inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre gl;
  gl.x.resize(n);
  gl.w.resize(n);
  for (int i = 0; i < n / 2 + 1; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p;
      }
      pp = n * (t * p1 - p0) / (t * t - 1.0);
      double step = p1 / pp;
      t -= step;
      if (std::fabs(step) < 1e-15) break;
    }
    gl.x[i] = -t;
    gl.x[n - 1 - i] = t;
    gl.w[i] = gl.w[n - 1 - i] = 2.0 / ((1.0 - t * t) * pp * pp);
  }
  return gl;
}

// ---- spherical Bessel by ascending series / stable recurrences ----

inline double bessel_j_series(int n, double x) {
  // j_n(x) = sum_k (-1)^k x^(n+2k) / (2^k k! (2n+2k+1)!!)
  double dfact = 1.0;
  for (int k = 1; k <= 2 * n + 1; k += 2) dfact *= k;
  double term = std::pow(x, n) / dfact;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -(x * x) / (2.0 * k * (2.0 * (n + k) + 1.0));
    sum += term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum) + 1e-300) break;
  }
  return sum;
}

inline double bessel_y_recur(int n, double x) {
  double y0 = -std::cos(x) / x;
  if (n == 0) return y0;
  double y1 = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int k = 2; k <= n; ++k) {
    double y = (2.0 * k - 1.0) / x * y1 - y0;
    y0 = y1;
    y1 = y;
  }
  return y1;
}

// derivative via f_n' = (n f_{n-1} - (n+1) f_{n+1}) / (2n+1)
inline double bessel_j_deriv_series(int n, double x) {
  if (n == 0) return -bessel_j_series(1, x);
  return (n * bessel_j_series(n - 1, x) - (n + 1.0) * bessel_j_series(n + 1, x)) / (2.0 * n + 1.0);
}

inline double bessel_y_deriv_recur(int n, double x) {
  if (n == 0) return -bessel_y_recur(1, x);
  return (n * bessel_y_recur(n - 1, x) - (n + 1.0) * bessel_y_recur(n + 1, x)) / (2.0 * n + 1.0);
}

inline std::complex<double> mode_strength_series(int n, double x) {
  using cd = std::complex<double>;
  cd h2(bessel_j_series(n, x), -bessel_y_recur(n, x));
  cd h2p(bessel_j_deriv_series(n, x), -bessel_y_deriv_recur(n, x));
  return bessel_j_series(n, x) - bessel_j_deriv_series(n, x) / h2p * h2;
}

// ---- union-find over arbitrary ids ----

struct UnionFind {
  std::vector<int> parent, rank_;

  explicit UnionFind(int n) : parent(n), rank_(n, 0) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }
};

// ---- brute-force minimum assignment over all permutations ----

inline double brute_force_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const int m = static_cast<int>(cost.front().size());
  std::vector<int> cols(m);
  std::iota(cols.begin(), cols.end(), 0);
  double best = 1e300;
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[i][cols[i]];
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace oracles
