#include <acyl/contraction.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace acyl;
using namespace acyl::gluer;

namespace {

VectorXd v1(double x) { return VectorXd::Constant(1, x); }

ContractionSpec scalar_spec(double f0) {
  ContractionSpec s;
  s.apply_L = [](const VectorXd& x) { return x; };
  s.solve_L = [](const VectorXd& y) { return y; };
  s.Q = [](const VectorXd& x) { return VectorXd(x.cwiseProduct(x)); };
  s.F_x0 = v1(f0);
  s.x0 = v1(0.0);
  s.c_L = 1.0;
  s.c_Q = 1.0;
  return s;
}

ContractionSpec diagonal_spec(int n, double kappa, double f0) {
  VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = 1.0 + 0.5 * i;
  ContractionSpec s;
  s.apply_L = [d](const VectorXd& x) { return VectorXd(d.cwiseProduct(x)); };
  s.solve_L = [d](const VectorXd& y) { return VectorXd(y.cwiseQuotient(d)); };
  s.Q = [kappa](const VectorXd& x) { return VectorXd(kappa * x.cwiseProduct(x)); };
  s.F_x0 = VectorXd::Constant(n, f0);
  s.x0 = VectorXd::Zero(n);
  s.c_L = 1.0;
  s.c_Q = kappa;
  return s;
}

}  // namespace

TEST(Contraction, ScalarQuadraticClosedForm) {
  const auto r = contract_solve(scalar_spec(0.01));
  EXPECT_NEAR(r.x(0), (-1.0 + std::sqrt(0.96)) / 2.0, 1e-10);
  EXPECT_LE(r.residual, 1e-12);
  EXPECT_LE(r.max_factor, 0.5);
  EXPECT_LE(std::abs(r.x(0)), r.radius);
}

TEST(Contraction, ZeroForcingStopsAtBasePoint) {
  const auto r = contract_solve(scalar_spec(0.0));
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.x(0), 0.0);
}

TEST(Contraction, PreconditionThresholdIsSharp) {
  EXPECT_THROW(contract_solve(scalar_spec(0.2)), PreconditionError);
  EXPECT_NO_THROW(contract_solve(scalar_spec(0.1)));
  EXPECT_THROW(contract_solve(scalar_spec(std::nextafter(0.1, 1.0))), PreconditionError);
  try {
    contract_solve(scalar_spec(0.2));
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("0.1"), std::string::npos);
  }
}

TEST(Contraction, UnderstatedConstantIsDetected) {
  auto s = scalar_spec(0.05);
  s.apply_L = [](const VectorXd& x) { return VectorXd(0.1 * x); };
  s.solve_L = [](const VectorXd& y) { return VectorXd(10.0 * y); };
  EXPECT_THROW(contract_solve(s), ConstantsInvalid);
  s.c_L = 0.0;
  EXPECT_THROW(contract_solve(s), ConstantsInvalid);
}

TEST(Contraction, InconsistentBasePointRejected) {
  auto s = scalar_spec(0.01);
  s.x0 = v1(0.3);
  EXPECT_THROW(contract_solve(s), InvalidInput);
}

TEST(Contraction, CertificateOnRandomPairs) {
  const auto s = diagonal_spec(12, 0.7, 0.9 * 1.0 / (10.0 * 0.7));
  const auto c = contraction_certificate(s, 100, 5);
  EXPECT_TRUE(c.holds());
  EXPECT_LE(c.worst_factor, 0.5);
  EXPECT_LE(c.worst_image, 0.7);
  const auto r = contract_solve(s);
  EXPECT_LE(r.residual, 1e-12);
  EXPECT_TRUE(spot_check(s, 50, 9).ok());
}

TEST(Contraction, SpotCheckFlagsWrongQuadraticConstant) {
  auto s = diagonal_spec(4, 1.0, 0.0);
  s.c_Q = 0.5;
  EXPECT_FALSE(spot_check(s, 50, 2).ok());
}

TEST(Regression, RecoversExactExponent) {
  std::vector<double> x, y;
  for (int t = 3; t <= 12; ++t) {
    x.push_back(t);
    y.push_back(2.5 * std::exp(-0.75 * t));
  }
  const auto f = fit_log_slope(x, y);
  EXPECT_NEAR(f.slope, -0.75, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 2.5, 1e-10);
  EXPECT_LE(f.ci_low, f.slope);
  EXPECT_GE(f.ci_high, f.slope);
}

TEST(Regression, RejectsShortOrInvalidInput) {
  EXPECT_THROW(fit_log_slope({1, 2, 3}, {1, 1, 1}), InvalidInput);
  EXPECT_THROW(fit_log_slope({1, 2, 3, 4}, {1, 1, 0, 1}), InvalidInput);
  EXPECT_THROW(fit_log_slope({1, 2, 3, 4}, {1, 1, 1}), InvalidInput);
}
