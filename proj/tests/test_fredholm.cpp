#include "fixtures.hpp"

#include <acyl/fredholm.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace acyl;
using namespace acyl::fredholm;

namespace {

RateVector negate(RateVector r) {
  for (double& x : r) x = -x;
  return r;
}

int sum_d0(const EndSpectrum& E) {
  int s = 0;
  for (const auto& e : E.ends) s += e.d0;
  return s;
}

double first_root(const IndicialData& e) {
  for (const auto& r : e.roots)
    if (r.root > 0) return r.root;
  return e.cutoff;
}

}  // namespace

TEST(Index, Antisymmetry) {
  std::mt19937_64 rng(11);
  for (const auto& E : fixtures::end_spectra())
    for (int t = 0; t < 200; ++t) {
      const auto r = fixtures::random_rate(E, rng);
      EXPECT_EQ(index_full(E, r).index, -index_full(E, negate(r)).index);
    }
}

TEST(Index, SmallPositiveRate) {
  for (const auto& E : fixtures::end_spectra()) {
    const RateVector r(E.size(), 1e-3);
    EXPECT_EQ(index_full(E, r).index, sum_d0(E) / 2);
    EXPECT_EQ(index_full(E, negate(r)).index, -sum_d0(E) / 2);
  }
}

TEST(Index, FixedAgreesWithFullForDecayingRates) {
  std::mt19937_64 rng(12);
  for (const auto& E : fixtures::end_spectra())
    for (int t = 0; t < 100; ++t) {
      auto r = fixtures::random_rate(E, rng);
      for (double& x : r) x = -std::abs(x);
      EXPECT_EQ(index_fixed_cross_section(E, r).index, index_full(E, r).index);
    }
}

TEST(Index, VaryingIsFixedPlusD0InRootFreeChamber) {
  std::mt19937_64 rng(13);
  for (const auto& E : fixtures::end_spectra())
    for (int t = 0; t < 50; ++t) {
      RateVector mu(E.size());
      for (std::size_t i = 0; i < mu.size(); ++i)
        mu[i] = -std::uniform_real_distribution<double>(0.01, 0.99)(rng) * first_root(E.ends[i]);
      EXPECT_EQ(index_varying_cross_section(E), index_fixed_cross_section(E, mu).index + sum_d0(E));
    }
}

TEST(Index, WallCrossingTelescopes) {
  std::mt19937_64 rng(14);
  for (const auto& E : fixtures::end_spectra()) {
    auto r = fixtures::random_rate(E, rng);
    int ind = index_full(E, r).index;
    for (int step = 0; step < 100; ++step) {
      const auto next = fixtures::random_rate(E, rng);
      int expected = ind;
      for (const auto& w : walls_between(E, r, next))
        expected = w.direction > 0 ? wall_crossing(expected, w.d) : expected - w.d;
      const int got = index_full(E, next).index;
      EXPECT_EQ(got, expected);
      r = next;
      ind = got;
    }
  }
}

TEST(Index, CriticalAndOutOfRangeRates) {
  const auto E = fixtures::end_spectra()[0];
  EXPECT_THROW(index_full(E, {0.0}), CriticalRate);
  EXPECT_THROW(index_full(E, {1.0}), CriticalRate);
  EXPECT_THROW(index_full(E, {-std::sqrt(2.0)}), CriticalRate);
  EXPECT_THROW(index_full(E, {100.0}), InsufficientSpectrum);
  EXPECT_THROW(index_full(E, {0.5, 0.5}), InvalidInput);
  EXPECT_THROW(index_fixed_cross_section(E, {0.5}), InvalidInput);
  EXPECT_THROW(wall_crossing(0, -1), InvalidInput);
}

TEST(Index, OddD0IsInconsistent) {
  EndSpectrum E{{spectral::sl_indicial_zero_data(1, 1)}, {}};
  EXPECT_THROW(index_varying_cross_section(E), ModelInconsistency);
}

TEST(Index, SquareTorusValues) {
  const auto E = fixtures::end_spectra()[0];
  // between the first two roots 1 and sqrt 2: d0/2 + d_1 = 2 + 8
  EXPECT_EQ(index_full(E, {1.2}).index, 10);
  EXPECT_EQ(index_full(E, {-0.5}).index, -2);
}

TEST(Index, JsonRoundTrip) {
  const auto E = fixtures::end_spectra()[1];
  const auto rep = index_full(E, {1.5, -0.3});
  const auto back = index_report_from_json(nlohmann::json::parse(to_json(rep).dump()));
  EXPECT_EQ(back.index, rep.index);
  ASSERT_EQ(back.per_end.size(), 2u);
  EXPECT_EQ(back.per_end[0].crossed.size(), rep.per_end[0].crossed.size());
}
