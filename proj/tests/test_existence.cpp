#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace csx;

TEST(Existence, RickerThresholdsForTheClassNineteenMatrix) {
  const auto rep = ricker_condition(fixtures::params(Vec3(0.2, 0.2, 0.2), fixtures::class19_matrix()));
  ASSERT_EQ(rep.species.size(), 3u);
  EXPECT_NEAR(rep.species[0].diagonal_threshold, 1.0 / 3.4, 1e-15);
  EXPECT_NEAR(rep.species[1].diagonal_threshold, 1.0 / 3.5, 1e-15);
  EXPECT_NEAR(rep.species[2].diagonal_threshold, 1.0 / 3.5, 1e-15);
  EXPECT_TRUE(rep.pass);
  const auto fail = ricker_condition(fixtures::params(Vec3(0.2, 0.9, 0.2), fixtures::class19_matrix()));
  EXPECT_FALSE(fail.pass);
  EXPECT_FALSE(fail.species[1].pass);
}

TEST(Existence, BuiltinsPassSampledConditions) {
  for (const auto& map : {fixtures::class19_lg(), fixtures::class19_aa(), fixtures::class19_ricker()}) {
    const auto rep = check_existence(map);
    EXPECT_TRUE(rep.a1.pass) << to_string(map.kind());
    EXPECT_TRUE(rep.a2.pass);
    EXPECT_TRUE(rep.a3.pass);
    EXPECT_GT(rep.a1.samples, 0u);
  }
}

TEST(Existence, RickerClosedFormImpliesSampledChecks) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> diag(0.5, 1.5), off(0.1, 2.0), frac(0.05, 0.99);
  int tested = 0;
  for (int k = 0; k < 400 && tested < 60; ++k) {
    Mat3 a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = i % 4 == 0 ? diag(rng) : off(rng);
    auto p = fixtures::params(Vec3::Ones(), a);
    const auto bounds = ricker_condition(p);
    for (int i = 0; i < 3; ++i) {
      p.r[i] = frac(rng) * std::max(bounds.species[i].diagonal_threshold, bounds.species[i].scaled_threshold);
    }
    ASSERT_TRUE(ricker_condition(p).pass);
    const auto rep = check_existence(make_ricker(p));
    EXPECT_TRUE(rep.pass()) << a;
    ++tested;
  }
  EXPECT_EQ(tested, 60);
}

// Grids 5 | 10 | 20 are nested, so refining can only lower the margin.
TEST(Existence, A3VerdictMonotoneUnderNestedRefinement) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int k = 0; k < 40; ++k) {
    Mat3 a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = u(rng);
    const Map3 map = make_ricker(fixtures::params(Vec3(u(rng), u(rng), u(rng)), a));
    const Vec3 w = axial_vector(map);
    const auto c5 = check_A3(map, w, 5), c10 = check_A3(map, w, 10), c20 = check_A3(map, w, 20);
    EXPECT_LE(c10.margin, c5.margin + 1e-15);
    EXPECT_LE(c20.margin, c10.margin + 1e-15);
    if (!c5.pass) {
      EXPECT_FALSE(c10.pass);
      EXPECT_FALSE(c20.pass);
    }
  }
}

TEST(Existence, DecoupledSpeciesFailA1) {
  const Map3 map = make_leslie_gower(fixtures::params(Vec3(1, 1, 1), Mat3::Identity()));
  const auto rep = check_existence(map);
  EXPECT_TRUE(rep.a2.pass);
  EXPECT_FALSE(rep.a1.pass);
  EXPECT_GE(rep.a1.margin, 0.0);
}

TEST(Existence, A3ExcludesOrigin) {
  // Every sample has nonempty support: a grid of 2 per axis gives 2^k points per face stratum.
  const Map3 map = fixtures::class19_lg();
  const auto rep = check_A3(map, axial_vector(map), 2);
  EXPECT_EQ(rep.samples, 3u * 2 + 3u * 4 + 8u);
}
