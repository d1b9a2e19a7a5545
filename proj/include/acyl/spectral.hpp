#pragma once

// Spectra of the cross-section operator J*D_Sigma on flat tori, and the
// indicial roots / homogeneous-kernel dimensions they produce.

#include <acyl/errors.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace acyl::spectral {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using CMat4 = Eigen::Matrix4cd;
using CVec4 = Eigen::Vector4cd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDedupTol = 1e-12;

// ---------------------------------------------------------------- lattices

/// Flat torus R^2 / (Z b1 + Z b2).
class LatticeTorus {
public:
  LatticeTorus(Vec2 b1, Vec2 b2) : b1_(std::move(b1)), b2_(std::move(b2)) {
    const double det = b1_.x() * b2_.y() - b1_.y() * b2_.x();
    const double scale = b1_.norm() * b2_.norm();
    if (!std::isfinite(det) || scale == 0.0 || std::abs(det) <= 1e-14 * scale)
      throw InvalidInput("degenerate lattice: basis determinant is zero");
  }

  const Vec2& b1() const { return b1_; }
  const Vec2& b2() const { return b2_; }

  Mat2 basis() const {
    Mat2 m;
    m.col(0) = b1_;
    m.col(1) = b2_;
    return m;
  }

  /// Columns are the dual basis: <b_i, b*_j> = delta_ij.
  Mat2 dual_basis() const { return basis().inverse().transpose(); }

  /// Wavevector 2*pi*xi of the Fourier mode with dual coordinates (m, n).
  Vec2 wavevector(std::int64_t m, std::int64_t n) const {
    const Mat2 d = dual_basis();
    return kTwoPi * (static_cast<double>(m) * d.col(0) + static_cast<double>(n) * d.col(1));
  }

  static LatticeTorus square2pi() { return {Vec2(kTwoPi, 0.0), Vec2(0.0, kTwoPi)}; }

  /// Hexagonal lattice scaled so the first positive Laplace eigenvalue is 2.
  /// The dual of a hexagonal lattice with side a is hexagonal with shortest
  /// vector 2/(a*sqrt(3)); 4 pi^2 |xi|^2 = 2 fixes a = 4 pi / sqrt(6).
  static LatticeTorus hex_first2() {
    const double a = 4.0 * std::numbers::pi / std::sqrt(6.0);
    return {Vec2(a, 0.0), Vec2(0.5 * a, 0.5 * std::sqrt(3.0) * a)};
  }

  static std::optional<LatticeTorus> preset(const std::string& name) {
    if (name == "square2pi") return square2pi();
    if (name == "hex-first2") return hex_first2();
    return std::nullopt;
  }

private:
  Vec2 b1_, b2_;
};

// ------------------------------------------------------------ tables

struct SpectrumEntry {
  double eigenvalue;
  int multiplicity;
};

struct SpectrumTable {
  std::vector<SpectrumEntry> entries;
  double cutoff = 0.0;

  void validate() const {
    if (!(cutoff >= 0.0)) throw InvalidInput("spectrum cutoff must be nonnegative");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].multiplicity < 1) throw InvalidInput("multiplicity must be >= 1");
      if (entries[i].eigenvalue < 0.0) throw InvalidInput("negative Laplace eigenvalue");
      if (i > 0 && !(entries[i].eigenvalue > entries[i - 1].eigenvalue))
        throw InvalidInput("spectrum entries must be strictly ascending");
    }
  }
};

struct IndicialRoot {
  double root;
  int d;
};

struct IndicialData {
  std::vector<IndicialRoot> roots;  // nonzero roots, ascending
  int d0 = 0;
  double cutoff = 0.0;  // every root with |root| <= cutoff is present

  /// Homogeneous-kernel dimension at `rate` (0 when not a root).
  int dimension_at(double rate, double tol = 1e-10) const {
    if (std::abs(rate) <= tol) return d0;
    for (const auto& r : roots)
      if (std::abs(r.root - rate) <= tol) return r.d;
    return 0;
  }

  void validate() const {
    if (d0 < 0) throw InvalidInput("d0 must be nonnegative");
    for (const auto& r : roots) {
      if (r.d < 1) throw InvalidInput("indicial multiplicity must be positive");
      if (std::abs(r.root) > cutoff + 1e-12) continue;
      if (dimension_at(-r.root) != r.d)
        throw ModelInconsistency("indicial roots not symmetric at " + std::to_string(r.root));
    }
  }
};

namespace detail {

// Continued-fraction rationalisation; nullopt when no p/q with q <= max_den
// reproduces x to within tol.
inline std::optional<std::pair<std::int64_t, std::int64_t>> rationalize(double x, double tol,
                                                                       std::int64_t max_den = 100000) {
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(r);
    if (std::abs(a) > 1e15) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    if (std::abs(static_cast<double>(p2) / static_cast<double>(q2) - x) <= tol) return std::pair{p2, q2};
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = r - a;
    if (frac == 0.0) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

// Lagrange-Gauss reduction of a 2D basis (columns). The reduced basis spans
// the same lattice and has a nearly orthogonal Gram matrix, which keeps the
// enumeration box tight for skewed lattices.
inline Mat2 gauss_reduce(Mat2 b) {
  Vec2 u = b.col(0), v = b.col(1);
  if (u.squaredNorm() > v.squaredNorm()) std::swap(u, v);
  for (int it = 0; it < 200; ++it) {
    const double mu = std::round(u.dot(v) / u.squaredNorm());
    v -= mu * u;
    if (v.squaredNorm() >= u.squaredNorm()) break;
    std::swap(u, v);
  }
  Mat2 out;
  out.col(0) = u;
  out.col(1) = v;
  return out;
}

struct DualPoint {
  std::int64_t m, n;  // coordinates in the (unreduced) dual basis
  double eigenvalue;  // 4 pi^2 |xi|^2
  std::int64_t key;   // exact scaled value when the Gram matrix is rational
};

// Every dual-lattice point with 4 pi^2 |xi|^2 <= cutoff. The boolean is true
// when the keys are exact integers (rational Gram matrix).
inline std::pair<std::vector<DualPoint>, bool> enumerate_dual(const LatticeTorus& lattice, double cutoff) {
  const Mat2 dual = lattice.dual_basis();
  const Mat2 reduced = gauss_reduce(dual);
  // integer change of basis: reduced = dual * U
  const Eigen::Matrix2d U = dual.inverse() * reduced;
  Eigen::Matrix<std::int64_t, 2, 2> Ui;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) Ui(i, j) = std::llround(U(i, j));

  const double c = 4.0 * std::numbers::pi * std::numbers::pi;
  const Mat2 gram = c * (reduced.transpose() * reduced);

  // exact arithmetic on 4 pi^2 * Gram when its entries are rational
  bool exact = true;
  std::int64_t den = 1;
  std::array<std::pair<std::int64_t, std::int64_t>, 3> fr{};
  const std::array<double, 3> g{gram(0, 0), gram(0, 1), gram(1, 1)};
  for (int i = 0; i < 3; ++i) {
    const auto r = rationalize(g[i], 1e-12 * std::max(1.0, std::abs(g[i])));
    if (!r) { exact = false; break; }
    fr[i] = *r;
  }
  if (exact) {
    for (const auto& [p, q] : fr) den = std::lcm(den, q);
    if (den > 1000000) exact = false;
  }

  // |x|^2 lambda_min(G) <= Q(x) gives the box for the reduced coordinates
  const double lmin = Eigen::SelfAdjointEigenSolver<Mat2>(gram).eigenvalues()(0);
  const auto bound = static_cast<std::int64_t>(std::floor(std::sqrt(std::max(cutoff, 0.0) / lmin))) + 1;

  std::vector<DualPoint> pts;
  for (std::int64_t i = -bound; i <= bound; ++i) {
    for (std::int64_t j = -bound; j <= bound; ++j) {
      const double di = static_cast<double>(i), dj = static_cast<double>(j);
      double ev;
      std::int64_t key = 0;
      if (exact) {
        const std::int64_t a = fr[0].first * (den / fr[0].second);
        const std::int64_t b = fr[1].first * (den / fr[1].second);
        const std::int64_t d = fr[2].first * (den / fr[2].second);
        key = a * i * i + 2 * b * i * j + d * j * j;
        ev = static_cast<double>(key) / static_cast<double>(den);
      } else {
        ev = g[0] * di * di + 2.0 * g[1] * di * dj + g[2] * dj * dj;
      }
      if (ev > cutoff * (1.0 + 1e-14) + 1e-14) continue;
      const std::int64_t m = Ui(0, 0) * i + Ui(0, 1) * j;
      const std::int64_t n = Ui(1, 0) * i + Ui(1, 1) * j;
      pts.push_back({m, n, std::max(ev, 0.0), key});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const DualPoint& x, const DualPoint& y) {
    return x.eigenvalue < y.eigenvalue;
  });
  return {std::move(pts), exact};
}

}  // namespace detail

/// All Laplace eigenvalues 4 pi^2 |xi|^2 <= cutoff (xi in the dual lattice)
/// with exact multiplicities.
inline SpectrumTable laplace_spectrum_torus(const LatticeTorus& lattice, double cutoff) {
  if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) throw InvalidInput("cutoff must be a finite nonnegative number");
  auto [pts, exact] = detail::enumerate_dual(lattice, cutoff);
  SpectrumTable table;
  table.cutoff = cutoff;
  std::int64_t last_key = -1;
  for (const auto& p : pts) {
    bool same = false;
    if (!table.entries.empty()) {
      const double prev = table.entries.back().eigenvalue;
      same = exact ? p.key == last_key : std::abs(p.eigenvalue - prev) <= kDedupTol * std::max(1.0, prev);
    }
    if (same) {
      ++table.entries.back().multiplicity;
    } else {
      table.entries.push_back({p.eigenvalue, 1});
      last_key = p.key;
    }
  }
  return table;
}

/// Indicial data of the torus model: roots +-sqrt(lambda) with
/// d = 2 * multiplicity(lambda), and d0 = 4 (the whole fibre at rate 0).
inline IndicialData torus_indicial_data(const SpectrumTable& spectrum) {
  spectrum.validate();
  IndicialData out;
  out.d0 = 4;
  out.cutoff = std::sqrt(spectrum.cutoff);
  std::vector<IndicialRoot> pos;
  for (const auto& e : spectrum.entries)
    if (e.eigenvalue > 0.0) pos.push_back({std::sqrt(e.eigenvalue), 2 * e.multiplicity});
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.roots.push_back({-it->root, it->d});
  for (const auto& r : pos) out.roots.push_back(r);
  return out;
}

/// Zero-rate data of a special-Lagrangian cross-section: d0 = 2 b0 + b1.
/// No nonzero roots are recorded (cutoff 0).
inline IndicialData sl_indicial_zero_data(int b0_sigma, int b1_sigma) {
  if (b0_sigma < 1 || b1_sigma < 0) throw InvalidInput("Betti numbers of Sigma must satisfy b0 >= 1, b1 >= 0");
  IndicialData out;
  out.d0 = 2 * b0_sigma + b1_sigma;
  out.cutoff = 0.0;
  return out;
}

// ----------------------------------------------------------- Clifford model

namespace detail {
// Hamilton product on (1, i, j, k) coordinates.
inline Eigen::Vector4d qmul(const Eigen::Vector4d& p, const Eigen::Vector4d& q) {
  return {p(0) * q(0) - p(1) * q(1) - p(2) * q(2) - p(3) * q(3),
          p(0) * q(1) + p(1) * q(0) + p(2) * q(3) - p(3) * q(2),
          p(0) * q(2) - p(1) * q(3) + p(2) * q(0) + p(3) * q(1),
          p(0) * q(3) + p(1) * q(2) - p(2) * q(1) + p(3) * q(0)};
}
inline Mat4 left_mult(const Eigen::Vector4d& q) {
  Mat4 m;
  for (int c = 0; c < 4; ++c) m.col(c) = qmul(q, Eigen::Vector4d::Unit(c));
  return m;
}
}  // namespace detail

/// J, gamma_1, gamma_2 on the rank-4 fibre, realised as left multiplication
/// by i, j, k on the quaternions.
struct CliffordModel {
  Mat4 J, gamma1, gamma2;

  static CliffordModel quaternionic() {
    return {detail::left_mult(Eigen::Vector4d::Unit(1)), detail::left_mult(Eigen::Vector4d::Unit(2)),
            detail::left_mult(Eigen::Vector4d::Unit(3))};
  }

  /// Largest violation among the Clifford relations.
  double relation_defect() const {
    const Mat4 I = Mat4::Identity();
    double d = 0.0;
    d = std::max(d, (J * J + I).norm());
    d = std::max(d, (gamma1 * gamma1 + I).norm());
    d = std::max(d, (gamma2 * gamma2 + I).norm());
    d = std::max(d, (gamma1 * gamma2 + gamma2 * gamma1).norm());
    d = std::max(d, (gamma1 * J + J * gamma1).norm());
    d = std::max(d, (gamma2 * J + J * gamma2).norm());
    d = std::max(d, (gamma1 * gamma2 - J).norm());
    return d;
  }

  void validate(double tol = 1e-12) const {
    if (relation_defect() > tol) throw InvalidInput("Clifford relations violated");
  }
};

struct ModeOperator {
  CMat4 A;   // D_Sigma on the mode: i (k1 gamma_1 + k2 gamma_2)
  CMat4 JA;  // J * A, Hermitian with eigenvalues +-|k|
};

/// D_Sigma restricted to the Fourier mode with wavevector k = 2 pi xi.
inline ModeOperator mode_operator(const CliffordModel& c, const Vec2& k) {
  const std::complex<double> I(0.0, 1.0);
  const CMat4 A = I * (k.x() * c.gamma1 + k.y() * c.gamma2).cast<std::complex<double>>();
  const CMat4 JA = c.J.cast<std::complex<double>>() * A;
  return {A, JA};
}

/// Minimal-polynomial test: with distinct eigenvalues l_1..l_r (clustered at
/// a relative tolerance), M is diagonalizable iff prod (M - l_i) vanishes.
/// `defect` is the norm of that product relative to ||M||^r.
struct SemisimplicityCheck {
  double defect;
  int distinct;
  bool semisimple(double tol = 1e-10) const { return defect < tol; }
};

inline SemisimplicityCheck check_semisimple(const Eigen::MatrixXcd& M, double cluster_tol = 1e-8) {
  const double scale = std::max(M.norm(), 1e-300);
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(M, false).eigenvalues();
  std::vector<std::complex<double>> reps;
  for (const auto& l : ev) {
    bool seen = false;
    for (const auto& r : reps) seen = seen || std::abs(l - r) <= cluster_tol * scale;
    if (!seen) reps.push_back(l);
  }
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(M.rows(), M.cols());
  const Eigen::MatrixXcd I = P;
  for (const auto& r : reps) P = (P * (M - r * I)).eval() / scale;
  return {P.norm(), static_cast<int>(reps.size())};
}

struct KernelVector {
  std::int64_t m, n;  // dual-lattice coordinates of the mode
  Vec2 wavevector;
  CVec4 vector;
};

/// Basis of the homogeneous kernel V_root: eigenvectors of J*A(k) with
/// eigenvalue `root`, collected over all modes with |k| = |root|.
inline std::vector<KernelVector> homogeneous_kernel_basis(const CliffordModel& c, const LatticeTorus& lattice,
                                                          double root) {
  c.validate();
  std::vector<KernelVector> out;
  const double target = root * root;
  auto [pts, exact] = detail::enumerate_dual(lattice, target * (1.0 + 1e-9) + 1e-12);
  for (const auto& p : pts) {
    if (std::abs(p.eigenvalue - target) > 1e-9 * std::max(1.0, target)) continue;
    const Vec2 k = lattice.wavevector(p.m, p.n);
    const auto op = mode_operator(c, k);
    Eigen::SelfAdjointEigenSolver<CMat4> es(op.JA);
    for (int i = 0; i < 4; ++i)
      if (std::abs(es.eigenvalues()(i) - root) <= 1e-9 * std::max(1.0, std::abs(root)))
        out.push_back({p.m, p.n, k, es.eigenvectors().col(i)});
  }
  return out;
}

// ------------------------------------------------------------------- JSON

inline nlohmann::json to_json(const SpectrumTable& t) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : t.entries) entries.push_back({e.eigenvalue, e.multiplicity});
  return {{"cutoff", t.cutoff}, {"entries", entries}};
}

inline SpectrumTable spectrum_from_json(const nlohmann::json& j) {
  SpectrumTable t;
  t.cutoff = j.at("cutoff").get<double>();
  for (const auto& e : j.at("entries")) t.entries.push_back({e.at(0).get<double>(), e.at(1).get<int>()});
  t.validate();
  return t;
}

inline nlohmann::json to_json(const IndicialData& d) {
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& r : d.roots) roots.push_back({r.root, r.d});
  return {{"cutoff", d.cutoff}, {"d0", d.d0}, {"roots", roots}};
}

inline IndicialData indicial_from_json(const nlohmann::json& j) {
  IndicialData d;
  d.cutoff = j.at("cutoff").get<double>();
  d.d0 = j.at("d0").get<int>();
  for (const auto& r : j.at("roots")) d.roots.push_back({r.at(0).get<double>(), r.at(1).get<int>()});
  d.validate();
  return d;
}

}  // namespace acyl::spectral
