#include "oracles.hpp"

#include <acyl/curves.hpp>

#include <gtest/gtest.h>

using namespace acyl;
using namespace acyl::curves;

TEST(Curves, CohomologyMatchesMonomialOracle) {
  for (int m = 0; m <= 6; ++m)
    for (int k = -4; k <= 8; ++k) {
      const auto got = normal_cohomology({m, k, std::nullopt, {}});
      const auto ref = oracle::normal_bundle(m, k);
      EXPECT_EQ(got.h0_N, ref.h0) << "m=" << m << " k=" << k;
      EXPECT_EQ(got.h1_N, ref.h1) << "m=" << m << " k=" << k;
      EXPECT_EQ(got.h0_N_minus_xbar, ref.h0x) << "m=" << m << " k=" << k;
      EXPECT_EQ(got.h0_N - got.h1_N, m);
    }
}

TEST(Curves, RigidityIffRange) {
  for (int m = 0; m <= 6; ++m)
    for (int k = -4; k <= 8; ++k) {
      const CurveData c{m, k, std::nullopt, {}};
      EXPECT_EQ(rigidity_criterion(c), normal_cohomology(c).h0_N_minus_xbar == 0);
      EXPECT_EQ(rigidity_criterion(c), -1 <= k && k <= m - 1);
    }
}

TEST(Curves, KernelLadder) {
  const auto l = acyl_kernel_ladder({2, 0, std::nullopt, {}});
  EXPECT_EQ(l.dim_ker_rate_mu, 0);
  EXPECT_EQ(l.dim_ker_rate_0, 4);
}

TEST(Transversality, MatchesDeterminantOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    MatrixXd A(4, 2), B(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) {
        A(i, j) = n(rng);
        B(i, j) = n(rng);
      }
    if (t % 2 == 0) B.col(1) = A.col(0) * 0.7 + A.col(1) * 1.3;  // forced intersection
    Eigen::Matrix4d M;
    M << A, B;
    const bool ref = std::abs(M.determinant()) > 1e-9 * std::pow(M.norm(), 4);
    EXPECT_EQ(transverse_intersection(A, B, 4).transverse, ref);
  }
}

TEST(Transversality, RejectsRankDeficientBasis) {
  MatrixXd A(4, 2);
  A << 1, 2, 0, 0, 0, 0, 0, 0;
  EXPECT_THROW(transverse_intersection(A, A, 4), InvalidInput);
}

TEST(Lagrangian, StandardFormExamples) {
  MatrixXd omega = MatrixXd::Zero(4, 4);
  omega(0, 2) = 1;
  omega(2, 0) = -1;
  omega(1, 3) = 1;
  omega(3, 1) = -1;
  MatrixXd L(4, 2);
  L << 1, 0, 0, 1, 0, 0, 0, 0;
  EXPECT_TRUE(lagrangian_subspace_check(L, omega));
  MatrixXd N(4, 2);
  N << 1, 0, 0, 0, 0, 1, 0, 0;
  EXPECT_FALSE(lagrangian_subspace_check(N, omega));
}

TEST(Hypothesis, HoloGluingTransverseExample) {
  MatrixXd ev_plus(4, 2), ev_minus(4, 2);
  ev_plus << 1, 0, 0, 1, 0, 0, 0, 0;
  ev_minus << 0, 0, 0, 0, 1, 0, 0, 1;
  const CurveData plus{1, 0, ev_plus, {}}, minus{1, 0, ev_minus, {}};
  const auto rep = check_holo_gluing_hypothesis(plus, minus, {0}, MatrixXd::Identity(4, 4));
  EXPECT_TRUE(rep.verdict);
  const auto bad = check_holo_gluing_hypothesis(plus, {1, 0, ev_plus, {}}, {0}, MatrixXd::Identity(4, 4));
  EXPECT_FALSE(bad.transverse);
  EXPECT_FALSE(bad.verdict);
}

TEST(Hypothesis, TransverseLineWitness) {
  MatrixXd avoid(4, 2);
  avoid << 1, 0, 0, 1, 0, 0, 0, 0;
  MatrixXd J = MatrixXd::Zero(4, 4);
  J(1, 0) = 1;
  J(0, 1) = -1;
  J(3, 2) = 1;
  J(2, 3) = -1;
  const auto line = sample_transverse_line(avoid, J, 99);
  ASSERT_TRUE(line.has_value());
  EXPECT_TRUE(transverse_intersection(avoid, *line, 4).transverse);
}

TEST(Hypothesis, SpecialLagrangianChecks) {
  EXPECT_TRUE(check_sl_gluing_hypothesis({1, 0, 0, 1, 0}, {1, 0, 0, 1, 0}, true, std::nullopt).verdict);
  EXPECT_FALSE(check_sl_gluing_hypothesis({1, 0, 1, 1, 0}, {1, 0, 0, 1, 0}, true, std::nullopt).verdict);
  EXPECT_THROW(check_sl_gluing_hypothesis({1, 1, 0, 1, 2}, {1, 0, 0, 1, 0}, true, std::nullopt), InsufficientData);
}

TEST(Moduli, DimensionsAndWarnings) {
  const auto ok = sl_moduli_dimensions({1, 1, 0, 1, 2});
  EXPECT_EQ(ok.dim_fixed, 0);
  EXPECT_EQ(ok.dim_varying, 2);
  EXPECT_TRUE(ok.consistent);
  EXPECT_FALSE(sl_moduli_dimensions({1, 0, 0, 3, 0}).consistent);
  EXPECT_FALSE(sl_moduli_dimensions({1, 0, 0, 1, 1}).consistent);
}

TEST(Json, CurveRoundTrip) {
  MatrixXd ev(4, 2);
  ev << 1, 0, 0, 1, 0, 0, 0, 0;
  const CurveData c{1, 0, ev, {"p"}};
  const auto back = curve_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(back.m, 1);
  ASSERT_TRUE(back.ev_image.has_value());
  EXPECT_EQ((*back.ev_image - ev).norm(), 0.0);
}
