#include "oracles.hpp"

#include <acyl/spectral.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace acyl;
using namespace acyl::spectral;

namespace {

void expect_matches_oracle(const LatticeTorus& L, double cutoff) {
  const auto table = laplace_spectrum_torus(L, cutoff);
  const auto ref = oracle::torus_spectrum(L.b1(), L.b2(), cutoff);
  ASSERT_EQ(table.entries.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(table.entries[i].eigenvalue, ref[i].first, 1e-12 * std::max(1.0, ref[i].first));
    EXPECT_EQ(table.entries[i].multiplicity, ref[i].second);
  }
}

}  // namespace

TEST(Spectrum, SquareTorusLowModes) {
  const auto t = laplace_spectrum_torus(LatticeTorus::square2pi(), 4.5);
  ASSERT_EQ(t.entries.size(), 4u);
  EXPECT_DOUBLE_EQ(t.entries[0].eigenvalue, 0.0);
  EXPECT_EQ(t.entries[0].multiplicity, 1);
  EXPECT_NEAR(t.entries[1].eigenvalue, 1.0, 1e-14);
  EXPECT_EQ(t.entries[1].multiplicity, 4);
  EXPECT_NEAR(t.entries[2].eigenvalue, 2.0, 1e-14);
  EXPECT_EQ(t.entries[2].multiplicity, 4);
  EXPECT_NEAR(t.entries[3].eigenvalue, 4.0, 1e-14);
  EXPECT_EQ(t.entries[3].multiplicity, 4);
}

TEST(Spectrum, HexPresetFirstEigenvalueTwo) {
  const auto t = laplace_spectrum_torus(LatticeTorus::hex_first2(), 2.5);
  ASSERT_EQ(t.entries.size(), 2u);
  EXPECT_NEAR(t.entries[1].eigenvalue, 2.0, 1e-12);
  EXPECT_EQ(t.entries[1].multiplicity, 6);
}

TEST(Spectrum, MatchesBruteForceOnRandomLattices) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 25; ++i) {
    auto [b1, b2] = oracle::random_lattice(rng);
    expect_matches_oracle(LatticeTorus(b1, b2), 50.0);
  }
}

TEST(Spectrum, RationalLatticesUseExactGrouping) {
  expect_matches_oracle(LatticeTorus({3.0, 0.0}, {1.0, 2.0}), 60.0);
  expect_matches_oracle(LatticeTorus({2.0, 0.0}, {0.0, 4.0}), 80.0);
}

TEST(Spectrum, InvariantUnderBasisChange) {
  const Vec2 b1(5.0, 0.3), b2(1.2, 4.4);
  const auto a = laplace_spectrum_torus(LatticeTorus(b1, b2), 40.0);
  const auto b = laplace_spectrum_torus(LatticeTorus(b1, b2 + 3.0 * b1), 40.0);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_NEAR(a.entries[i].eigenvalue, b.entries[i].eigenvalue, 1e-10);
    EXPECT_EQ(a.entries[i].multiplicity, b.entries[i].multiplicity);
  }
}

TEST(Spectrum, RejectsBadInput) {
  EXPECT_THROW(LatticeTorus({1.0, 0.0}, {2.0, 0.0}), InvalidInput);
  EXPECT_THROW(laplace_spectrum_torus(LatticeTorus::square2pi(), -1.0), InvalidInput);
}

TEST(Indicial, SquareTorusDZeroIsFour) {
  const auto d = torus_indicial_data(laplace_spectrum_torus(LatticeTorus::square2pi(), 10.0));
  EXPECT_EQ(d.d0, 4);
  EXPECT_EQ(d.dimension_at(1.0), 8);
  EXPECT_EQ(d.dimension_at(-1.0), 8);
}

TEST(Indicial, HexRootsUpToSqrtTwo) {
  const auto d = torus_indicial_data(laplace_spectrum_torus(LatticeTorus::hex_first2(), 2.0));
  ASSERT_EQ(d.roots.size(), 2u);
  EXPECT_NEAR(d.roots[0].root, -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(d.roots[1].root, std::sqrt(2.0), 1e-12);
  EXPECT_EQ(d.roots[1].d, 12);
  EXPECT_EQ(d.roots[0].d, 12);
}

TEST(Indicial, RootsSymmetric) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    auto [b1, b2] = oracle::random_lattice(rng);
    const auto d = torus_indicial_data(laplace_spectrum_torus(LatticeTorus(b1, b2), 50.0));
    EXPECT_NO_THROW(d.validate());
    for (const auto& r : d.roots) EXPECT_EQ(d.dimension_at(-r.root), r.d);
  }
}

TEST(Indicial, SpecialLagrangianZeroData) {
  EXPECT_EQ(sl_indicial_zero_data(1, 0).d0, 2);
  EXPECT_EQ(sl_indicial_zero_data(2, 4).d0, 8);
  EXPECT_THROW(sl_indicial_zero_data(0, 0), InvalidInput);
}

TEST(Clifford, QuaternionicModelSatisfiesRelations) {
  const auto c = CliffordModel::quaternionic();
  EXPECT_LT(c.relation_defect(), 1e-14);
}

TEST(Clifford, ModeOperatorSpectrum) {
  const auto c = CliffordModel::quaternionic();
  const Vec2 k(0.6, -1.3);
  const auto op = mode_operator(c, k);
  EXPECT_LT((op.JA - op.JA.adjoint()).norm(), 1e-14);
  Eigen::SelfAdjointEigenSolver<CMat4> es(op.JA);
  const double s = k.norm();
  EXPECT_NEAR(es.eigenvalues()(0), -s, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), -s, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(2), s, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(3), s, 1e-12);
  EXPECT_TRUE(check_semisimple(op.JA).semisimple());
}

TEST(Clifford, KernelBasisDimensionMatchesIndicialData) {
  const auto L = LatticeTorus::hex_first2();
  const auto basis = homogeneous_kernel_basis(CliffordModel::quaternionic(), L, std::sqrt(2.0));
  EXPECT_EQ(basis.size(), 12u);
  const auto c = CliffordModel::quaternionic();
  for (const auto& kv : basis) {
    const auto op = mode_operator(c, kv.wavevector);
    EXPECT_LT((op.JA * kv.vector - std::sqrt(2.0) * kv.vector).norm(), 1e-10);
  }
}

TEST(Json, SpectrumRoundTrip) {
  const auto t = laplace_spectrum_torus(LatticeTorus::square2pi(), 9.0);
  const auto u = spectrum_from_json(nlohmann::json::parse(to_json(t).dump()));
  ASSERT_EQ(u.entries.size(), t.entries.size());
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    EXPECT_EQ(u.entries[i].eigenvalue, t.entries[i].eigenvalue);
    EXPECT_EQ(u.entries[i].multiplicity, t.entries[i].multiplicity);
  }
  const auto d = torus_indicial_data(t);
  const auto e = indicial_from_json(nlohmann::json::parse(to_json(d).dump()));
  EXPECT_EQ(e.d0, d.d0);
  EXPECT_EQ(e.roots.size(), d.roots.size());
}

TEST(Clifford, SemisimplicityDetectsJordanBlock) {
  Eigen::MatrixXcd N(3, 3);
  N << 2, 1, 0, 0, 2, 0, 0, 0, -1;
  EXPECT_FALSE(check_semisimple(N).semisimple());
  N(0, 1) = 0;
  EXPECT_TRUE(check_semisimple(N).semisimple());
  EXPECT_TRUE(check_semisimple(Eigen::MatrixXcd::Zero(4, 4)).semisimple());
}

TEST(Clifford, DegenerateModesAreSemisimple) {
  // random lattices include modes whose eigenvector basis is numerically degenerate
  std::mt19937_64 rng(99);
  const auto c = CliffordModel::quaternionic();
  for (int i = 0; i < 100; ++i) {
    auto [b1, b2] = oracle::random_lattice(rng);
    const LatticeTorus L(b1, b2);
    for (const auto& p : detail::enumerate_dual(L, 50.0).first)
      ASSERT_TRUE(check_semisimple(mode_operator(c, L.wavevector(p.m, p.n)).JA).semisimple()) << i;
  }
}
