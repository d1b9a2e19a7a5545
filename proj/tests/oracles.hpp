#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library paths it is used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Brute-force Laplace spectrum of R^2 / (Z b1 + Z b2): every integer pair in
/// a box around the origin, eigenvalue 4 pi^2 |m d1 + n d2|^2 computed from
/// the explicit dual vectors, grouped with a loose relative tolerance.
inline std::vector<std::pair<double, int>> torus_spectrum(const Eigen::Vector2d& b1, const Eigen::Vector2d& b2,
                                                          double cutoff) {
  Eigen::Matrix2d B;
  B << b1, b2;
  const Eigen::Matrix2d D = B.inverse().transpose();
  const Eigen::Vector2d d1 = D.col(0), d2 = D.col(1);
  const Eigen::Matrix2d G = D.transpose() * D;
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(G).eigenvalues()(0);
  const double c = 4.0 * std::numbers::pi * std::numbers::pi;
  const auto R = static_cast<int>(std::ceil(std::sqrt(cutoff / (c * lmin)))) + 2;
  std::vector<double> evs;
  for (int m = -R; m <= R; ++m)
    for (int n = -R; n <= R; ++n) {
      const double ev = c * (m * d1 + n * d2).squaredNorm();
      if (ev <= cutoff + 1e-9) evs.push_back(ev);
    }
  std::sort(evs.begin(), evs.end());
  std::vector<std::pair<double, int>> out;
  for (double e : evs) {
    if (!out.empty() && std::abs(e - out.back().first) <= 1e-9 * std::max(1.0, e))
      ++out.back().second;
    else
      out.emplace_back(e, 1);
  }
  // drop values that only crept in through the loose inclusion tolerance
  while (!out.empty() && out.back().first > cutoff * (1.0 + 1e-12)) out.pop_back();
  return out;
}

inline std::pair<Eigen::Vector2d, Eigen::Vector2d> random_lattice(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(3.0, 9.0), ang(0.0, 2.0 * std::numbers::pi),
      gap(0.35, std::numbers::pi - 0.35);
  const double r1 = len(rng), r2 = len(rng), t1 = ang(rng), t2 = t1 + gap(rng);
  return {Eigen::Vector2d(r1 * std::cos(t1), r1 * std::sin(t1)), Eigen::Vector2d(r2 * std::cos(t2), r2 * std::sin(t2))};
}

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
inline int integer_rank(std::vector<std::vector<__int128>> a) {
  const std::size_t rows = a.size();
  if (rows == 0) return 0;
  const std::size_t cols = a[0].size();
  std::size_t r = 0;
  __int128 prev = 1;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
      a[i][c] = 0;
    }
    prev = a[r][c];
    ++r;
  }
  return static_cast<int>(r);
}

/// h^0(O(d)) by counting degree-d monomials in two homogeneous variables.
inline int h0_monomials(int d) {
  int count = 0;
  for (int a = 0; a <= std::max(d, 0); ++a)
    for (int b = 0; b <= std::max(d, 0); ++b)
      if (a + b == d) ++count;
  return count;
}

/// h^1(O(d)) from the Cech complex of the standard cover: Laurent monomials
/// x^a y^b with a, b <= -1 and a + b = d.
inline int h1_cech(int d) {
  int count = 0;
  for (int a = -1; a >= d + 1; --a) {
    const int b = d - a;
    if (b <= -1) ++count;
  }
  return count;
}

/// Dimension of degree-d sections vanishing at the m points 1..m of the
/// affine chart: (d+1) minus the rank of the Vandermonde evaluation matrix.
inline int h0_vanishing(int d, int m) {
  if (d < 0) return 0;
  if (m == 0) return d + 1;
  std::vector<std::vector<__int128>> V(static_cast<std::size_t>(m), std::vector<__int128>(static_cast<std::size_t>(d + 1)));
  for (int p = 0; p < m; ++p) {
    __int128 x = 1;
    for (int i = 0; i <= d; ++i) {
      V[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] = x;
      x *= (p + 1);
    }
  }
  return (d + 1) - integer_rank(V);
}

struct Cohomology {
  int h0, h1, h0x;
};

inline Cohomology normal_bundle(int m, int k) {
  const int k2 = m - k - 2;
  return {h0_monomials(k) + h0_monomials(k2), h1_cech(k) + h1_cech(k2), h0_vanishing(k, m) + h0_vanishing(k2, m)};
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
