#pragma once

// Rational-curve normal-bundle cohomology, rigidity, evaluation-map
// transversality and the special-Lagrangian Betti-number criteria, plus the
// hypothesis checkers built on them.

#include <acyl/errors.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace acyl::curves {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kRankTol = 1e-9;  // relative to the largest singular value
inline constexpr double kIsotropyTol = 1e-10;

/// h^0(P^1, O(d)).
inline int h0_line_bundle(int d) { return std::max(d + 1, 0); }

/// Rational curve with N = O(k) + O(m-k-2) meeting the anticanonical K3 in m
/// points.
struct CurveData {
  int m = 0;
  int k = 0;
  std::optional<MatrixXd> ev_image;  // 4m x 2 h0(N), columns span im(ev)
  std::vector<std::string> point_labels;

  int k_other() const { return m - k - 2; }

  void validate() const;
};

struct NormalCohomology {
  int h0_N;
  int h1_N;
  int h0_N_minus_xbar;
};

inline NormalCohomology normal_cohomology(const CurveData& c) {
  if (c.m < 0) throw InvalidInput("m must be nonnegative");
  const int k1 = c.k, k2 = c.k_other();
  // Serre duality on P^1: h^1(O(d)) = h^0(O(-d-2)).
  const int h0 = h0_line_bundle(k1) + h0_line_bundle(k2);
  const int h1 = h0_line_bundle(-k1 - 2) + h0_line_bundle(-k2 - 2);
  const int h0x = h0_line_bundle(k1 - c.m) + h0_line_bundle(k2 - c.m);
  return {h0, h1, h0x};
}

inline bool rigidity_criterion(const CurveData& c) {
  if (c.m < 0) throw InvalidInput("m must be nonnegative");
  return -1 <= c.k && c.k <= c.m - 1;
}

/// Real dimensions of the kernel at a small negative rate and at rate 0 for
/// the ACyl associative built from the curve.
struct KernelLadder {
  int dim_ker_rate_mu;
  int dim_ker_rate_0;
};

inline KernelLadder acyl_kernel_ladder(const CurveData& c) {
  const auto h = normal_cohomology(c);
  return {2 * h.h0_N_minus_xbar, 2 * h.h0_N};
}

// ------------------------------------------------------------ linear algebra

inline int numerical_rank(const MatrixXd& M, double rel_tol = kRankTol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

struct Transversality {
  bool transverse = false;
  int rank_a = 0, rank_b = 0, rank_ab = 0;
  double min_singular = 0.0;  // smallest singular value of [Qa | Qb]
};

/// Decides whether span(A) and span(B) meet only at 0. Columns of A and B
/// must be linearly independent.
inline Transversality transverse_intersection(const MatrixXd& A, const MatrixXd& B, int ambient_dim) {
  if (A.rows() != ambient_dim || B.rows() != ambient_dim)
    throw InvalidInput("subspace bases must have ambient_dim rows");
  Transversality t;
  t.rank_a = numerical_rank(A);
  t.rank_b = numerical_rank(B);
  if (t.rank_a != A.cols() || t.rank_b != B.cols())
    throw InvalidInput("rank-deficient basis passed to transverse_intersection");
  if (A.cols() + B.cols() == 0) {
    t.transverse = true;
    return t;
  }
  // Orthonormalise each block so the test depends only on the subspaces.
  MatrixXd C(ambient_dim, A.cols() + B.cols());
  if (A.cols() > 0) C.leftCols(A.cols()) = Eigen::HouseholderQR<MatrixXd>(A).householderQ() *
                                           MatrixXd::Identity(ambient_dim, A.cols());
  if (B.cols() > 0) C.rightCols(B.cols()) = Eigen::HouseholderQR<MatrixXd>(B).householderQ() *
                                            MatrixXd::Identity(ambient_dim, B.cols());
  t.rank_ab = numerical_rank(C);
  Eigen::JacobiSVD<MatrixXd> svd(C);
  const auto& s = svd.singularValues();
  t.min_singular = C.cols() > C.rows() ? 0.0 : s(s.size() - 1);
  t.transverse = t.rank_ab == t.rank_a + t.rank_b;
  return t;
}

inline void CurveData::validate() const {
  if (m < 0) throw InvalidInput("m must be nonnegative");
  if (!point_labels.empty() && static_cast<int>(point_labels.size()) != m)
    throw InvalidInput("point_labels must have m entries");
  if (ev_image) {
    if (ev_image->rows() != 4 * m) throw InvalidInput("ev_image must have 4m rows");
    const int want = 2 * normal_cohomology(*this).h0_N;
    if (numerical_rank(*ev_image) != want)
      throw InvalidInput("ev_image rank must equal 2 h0(N) = " + std::to_string(want));
  }
}

// -------------------------------------------------------------- Lagrangians

struct LagrangianCheck {
  bool isotropic = false;
  bool half_dimensional = false;
  double isotropy_defect = 0.0;
  bool lagrangian() const { return isotropic && half_dimensional; }
};

inline LagrangianCheck lagrangian_check(const MatrixXd& basis, const MatrixXd& omega) {
  const auto n2 = omega.rows();
  if (omega.cols() != n2 || n2 % 2 != 0) throw InvalidInput("symplectic form must be square of even size");
  if ((omega + omega.transpose()).norm() > 1e-12 * std::max(1.0, omega.norm()))
    throw InvalidInput("symplectic form must be antisymmetric");
  if (numerical_rank(omega) != n2) throw InvalidInput("degenerate symplectic form");
  if (basis.rows() != n2) throw InvalidInput("basis has the wrong ambient dimension");
  LagrangianCheck out;
  const int r = numerical_rank(basis);
  out.half_dimensional = 2 * r == n2;
  if (basis.cols() == 0 || r == 0) {
    out.isotropic = true;
    return out;
  }
  // isotropy on an orthonormal basis of the span, so rescaling is harmless
  Eigen::JacobiSVD<MatrixXd> svd(basis, Eigen::ComputeThinU);
  const MatrixXd Q = svd.matrixU().leftCols(r);
  out.isotropy_defect = (Q.transpose() * omega * Q).cwiseAbs().maxCoeff() / omega.cwiseAbs().maxCoeff();
  out.isotropic = out.isotropy_defect <= kIsotropyTol;
  return out;
}

inline bool lagrangian_subspace_check(const MatrixXd& basis, const MatrixXd& omega) {
  return lagrangian_check(basis, omega).lagrangian();
}

// ---------------------------------------------------------- SL Betti data

struct SLBettiData {
  int b0_L = 1, b1_L = 0, b2_L = 0;
  int b0_sigma = 1, b1_sigma = 0;

  void validate() const {
    if (b0_L < 1 || b0_sigma < 1 || b1_L < 0 || b2_L < 0 || b1_sigma < 0)
      throw InvalidInput("Betti numbers must be nonnegative with b0_L, b0_sigma >= 1");
  }

  /// The injectivity condition b2(L) - b0(Sigma) + b0(L) = 0.
  bool injective() const { return b2_L - b0_sigma + b0_L == 0; }
};

struct SLModuliDimensions {
  int dim_fixed;
  int dim_varying;
  bool consistent;
  std::vector<std::string> warnings;
};

inline SLModuliDimensions sl_moduli_dimensions(const SLBettiData& d) {
  d.validate();
  SLModuliDimensions out{d.b2_L + d.b0_L - d.b0_sigma, d.b1_L + d.b0_L, true, {}};
  if (out.dim_fixed < 0) {
    out.consistent = false;
    out.warnings.push_back("negative fixed-boundary moduli dimension " + std::to_string(out.dim_fixed) +
                           ": Betti data cannot come from an ACyl special Lagrangian");
  }
  if (d.b1_sigma % 2 != 0) {
    out.consistent = false;
    out.warnings.push_back("b1(Sigma) is odd; a closed oriented surface has even b1");
  } else if (d.b1_L < d.b1_sigma / 2) {
    // the image of H^1(L) in H^1(Sigma) is Lagrangian, of dimension b1(Sigma)/2
    out.consistent = false;
    out.warnings.push_back("b1(L) < b1(Sigma)/2 contradicts the half-dimensional boundary image");
  }
  return out;
}

// -------------------------------------------------------------- hypotheses

struct HypothesisReport {
  bool matched = false;
  bool injective_plus = false;
  bool injective_minus = false;
  bool transverse = false;
  bool verdict = false;
  nlohmann::json details = nlohmann::json::object();

  void finish() { verdict = matched && injective_plus && injective_minus && transverse; }
};

namespace detail {
inline bool is_permutation(const std::vector<int>& p, int m) {
  if (static_cast<int>(p.size()) != m) return false;
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  for (int v : p) {
    if (v < 0 || v >= m || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

inline nlohmann::json transversality_json(const Transversality& t) {
  return {{"rank_a", t.rank_a}, {"rank_b", t.rank_b}, {"rank_ab", t.rank_ab}, {"min_singular", t.min_singular}};
}
}  // namespace detail

/// Checks the three conditions for gluing two ACyl holomorphic curves.
/// `matching[j]` is the minus-side index of the point matched with plus point
/// j; `rotation` acts on the 4m-dimensional sum of K3 tangent spaces after
/// the plus-side blocks have been reordered by the matching.
inline HypothesisReport check_holo_gluing_hypothesis(const CurveData& plus, const CurveData& minus,
                                                     const std::vector<int>& matching, const MatrixXd& rotation) {
  if (plus.m != minus.m) throw InvalidInput("plus and minus curves meet the K3 in different numbers of points");
  if (!plus.ev_image || !minus.ev_image) throw InvalidInput("both evaluation images are required");
  plus.validate();
  minus.validate();
  const int m = plus.m;
  const int dim = 4 * m;
  if (rotation.rows() != dim || rotation.cols() != dim) throw InvalidInput("rotation must be 4m x 4m");
  if (numerical_rank(rotation) != dim) throw InvalidInput("rotation must be invertible");

  HypothesisReport rep;
  const auto hp = normal_cohomology(plus), hm = normal_cohomology(minus);
  rep.matched = detail::is_permutation(matching, m);
  rep.injective_plus = hp.h0_N_minus_xbar == 0;
  rep.injective_minus = hm.h0_N_minus_xbar == 0;
  rep.details["h0_N_minus_xbar"] = {{"plus", hp.h0_N_minus_xbar}, {"minus", hm.h0_N_minus_xbar}};
  if (rep.matched) {
    MatrixXd permuted(dim, plus.ev_image->cols());
    for (int j = 0; j < m; ++j) permuted.middleRows(4 * matching[static_cast<std::size_t>(j)], 4) =
                                    plus.ev_image->middleRows(4 * j, 4);
    const auto t = transverse_intersection(rotation * permuted, *minus.ev_image, dim);
    rep.transverse = t.transverse;
    rep.details["transversality"] = detail::transversality_json(t);
  } else {
    rep.details["transversality"] = "skipped: matching is not a permutation";
  }
  rep.finish();
  return rep;
}

/// Draws candidate complex lines span{v, Jx v} in R^4 until one meets
/// `avoid` (a 2-dimensional subspace) only at 0. This is the explicit witness
/// for the genericity choice of the minus-side line.
inline std::optional<MatrixXd> sample_transverse_line(const MatrixXd& avoid, const MatrixXd& complex_structure,
                                                      std::uint64_t seed, int attempts = 64) {
  if (avoid.rows() != 4 || complex_structure.rows() != 4 || complex_structure.cols() != 4)
    throw InvalidInput("sample_transverse_line works in R^4");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int a = 0; a < attempts; ++a) {
    VectorXd v(4);
    for (int i = 0; i < 4; ++i) v(i) = normal(rng);
    MatrixXd line(4, 2);
    line.col(0) = v;
    line.col(1) = complex_structure * v;
    if (numerical_rank(line) != 2) continue;
    if (transverse_intersection(avoid, line, 4).transverse) return line;
  }
  return std::nullopt;
}

/// Checks the conditions for gluing two ACyl special Lagrangians.
inline HypothesisReport check_sl_gluing_hypothesis(const SLBettiData& plus, const SLBettiData& minus,
                                                   bool matched_sections,
                                                   const std::optional<std::pair<MatrixXd, MatrixXd>>& k_map_images) {
  plus.validate();
  minus.validate();
  HypothesisReport rep;
  rep.matched = matched_sections;
  rep.injective_plus = plus.injective();
  rep.injective_minus = minus.injective();
  rep.details["injectivity_defect"] = {{"plus", plus.b2_L - plus.b0_sigma + plus.b0_L},
                                       {"minus", minus.b2_L - minus.b0_sigma + minus.b0_L}};
  if (plus.b1_L == 0 && minus.b1_L == 0) {
    rep.transverse = true;
    rep.details["transversality"] = "automatic: b1(L) = 0 on both sides";
  } else {
    if (!k_map_images)
      throw InsufficientData("b1(L) > 0 requires the images of the boundary maps to decide transversality");
    const auto& [a, b] = *k_map_images;
    const auto t = transverse_intersection(a, b, static_cast<int>(a.rows()));
    rep.transverse = t.transverse;
    rep.details["transversality"] = detail::transversality_json(t);
  }
  rep.finish();
  return rep;
}

// ------------------------------------------------------------------- JSON

inline nlohmann::json matrix_to_json(const MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

/// Rows of equal length; an empty array is a 0 x 0 matrix.
inline MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows_if_empty = 0) {
  if (!j.is_array()) throw InvalidInput("matrix must be an array of rows");
  if (j.empty()) return MatrixXd(rows_if_empty, 0);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  MatrixXd M(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InvalidInput("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return M;
}

inline nlohmann::json to_json(const CurveData& c) {
  nlohmann::json j{{"m", c.m}, {"k", c.k}, {"point_labels", c.point_labels}};
  if (c.ev_image) j["ev_image"] = matrix_to_json(*c.ev_image);
  return j;
}

inline CurveData curve_from_json(const nlohmann::json& j) {
  CurveData c;
  c.m = j.at("m").get<int>();
  c.k = j.at("k").get<int>();
  if (j.contains("point_labels")) c.point_labels = j.at("point_labels").get<std::vector<std::string>>();
  if (j.contains("ev_image")) c.ev_image = matrix_from_json(j.at("ev_image"), 4 * c.m);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const SLBettiData& d) {
  return {{"b0_L", d.b0_L}, {"b1_L", d.b1_L}, {"b2_L", d.b2_L}, {"b0_sigma", d.b0_sigma}, {"b1_sigma", d.b1_sigma}};
}

inline SLBettiData betti_from_json(const nlohmann::json& j) {
  SLBettiData d{j.at("b0_L").get<int>(), j.at("b1_L").get<int>(), j.at("b2_L").get<int>(),
                j.at("b0_sigma").get<int>(), j.at("b1_sigma").get<int>()};
  d.validate();
  return d;
}

inline nlohmann::json to_json(const HypothesisReport& r) {
  return {{"matched", r.matched},     {"injective_plus", r.injective_plus}, {"injective_minus", r.injective_minus},
          {"transverse", r.transverse}, {"verdict", r.verdict},             {"details", r.details}};
}

inline HypothesisReport hypothesis_from_json(const nlohmann::json& j) {
  HypothesisReport r;
  r.matched = j.at("matched").get<bool>();
  r.injective_plus = j.at("injective_plus").get<bool>();
  r.injective_minus = j.at("injective_minus").get<bool>();
  r.transverse = j.at("transverse").get<bool>();
  r.details = j.value("details", nlohmann::json::object());
  r.finish();
  if (r.verdict != j.at("verdict").get<bool>()) throw InvalidInput("verdict is not the conjunction of the conditions");
  return r;
}

}  // namespace acyl::curves
