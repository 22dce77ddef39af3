#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace csx;

namespace {

Map3 symmetric_half_lg() {
  Mat3 a;
  a << 1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0;
  return make_leslie_gower(fixtures::params(Vec3(1, 1, 1), a));
}

const FixedPoint3* find(const FixedPointCensus<3>& c, const Vec3& x) {
  for (const auto& p : c.points) {
    if ((p.location - x).norm() < 1e-9) return &p;
  }
  return nullptr;
}

}  // namespace

// Leslie-Gower fixed points solve A_KK x_K = r_K on each support K; with
// r = 1 and a_ij = 1/2 off the diagonal these are 1, 2/3 and 1/2.
TEST(Analysis, SymmetricLeslieGowerCensusMatchesClosedForm) {
  const auto census = find_all_fixed_points(symmetric_half_lg());
  EXPECT_EQ(census.points.size(), 8u);
  EXPECT_TRUE(census.degenerate_faces.empty());
  const double t = 2.0 / 3.0;
  const std::vector<Vec3> expected{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(t, t, 0),
                                   Vec3(t, 0, t), Vec3(0, t, t), Vec3(0.5, 0.5, 0.5)};
  for (const auto& x : expected) {
    const auto* p = find(census, x);
    ASSERT_NE(p, nullptr) << x.transpose();
    EXPECT_LT(p->residual, 1e-12);
    EXPECT_EQ(p->support, support_of(x));
  }
  const auto* q = find(census, Vec3(0.5, 0.5, 0.5));
  EXPECT_EQ(q->s_type, OnSType::Attractor);
  const auto* w1 = find(census, Vec3(1, 0, 0));
  EXPECT_EQ(w1->s_type, OnSType::Repeller);
  const auto* v12 = find(census, Vec3(t, t, 0));
  EXPECT_EQ(v12->s_type, OnSType::Saddle);
}

TEST(Analysis, ClassNineteenInteriorIsIndexMinusOneSaddle) {
  for (const auto& map : {fixtures::class19_lg(), fixtures::class19_aa(), fixtures::class19_ricker()}) {
    const auto q = require_interior_fixed_point(map);
    EXPECT_TRUE(q.c1_holds);
    ASSERT_TRUE(q.index.has_value());
    EXPECT_EQ(*q.index, -1);
    EXPECT_EQ(q.s_type, OnSType::Saddle);
    ASSERT_EQ(q.eigenvalues.size(), 3u);
    const double mu = q.eigenvalues[0].real(), l1 = q.eigenvalues[1].real(), l2 = q.eigenvalues[2].real();
    EXPECT_GT(mu, 0.0);
    EXPECT_LT(mu, l1);
    EXPECT_LT(l1, 1.0);
    EXPECT_GT(l2, 1.0);
  }
}

TEST(Analysis, ClassNineteenBoundaryTypes) {
  const auto census = find_all_fixed_points(fixtures::class19_lg());
  int attractors = 0, repellers = 0;
  for (const auto& p : census.points) {
    if (support_size(p.support) == 0 || support_size(p.support) == 3) continue;
    attractors += p.s_type == OnSType::Attractor;
    repellers += p.s_type == OnSType::Repeller;
  }
  EXPECT_EQ(attractors, 2);
  EXPECT_EQ(repellers, 2);
}

TEST(Analysis, IndexIsSignOfDetIMinusJacobian) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 300; ++k) {
    Mat3 j;
    for (int i = 0; i < 9; ++i) j(i / 3, i % 3) = u(rng);
    const double det = (Mat3::Identity() - j).determinant();
    if (std::abs(det) < 1e-3) continue;
    bool near_one = false;
    for (auto l : eigen3(j)) near_one = near_one || std::abs(l - 1.0) < 1e-6;
    if (near_one) continue;
    EXPECT_EQ(fixed_point_index<3>(j), det > 0 ? 1 : -1);
  }
}

TEST(Analysis, C1HoldsForPositiveInverse) {
  // J = I - x 1^T / 2 at x = (1/3, 1/3, 1/3): inverse I + x 1^T is positive, mu = 1/2.
  const Mat3 j = Mat3::Identity() - Vec3::Constant(1.0 / 3).asDiagonal() * Mat3::Ones() / 2.0;
  const auto rep = verify_C1<3>(j);
  EXPECT_TRUE(rep.holds);
  EXPECT_NEAR(rep.mu.real(), 0.5, 1e-12);
  ASSERT_TRUE(rep.perron_vector.has_value());
  EXPECT_NEAR(rep.perron_vector->sum(), 1.0, 1e-12);
  EXPECT_GT(rep.perron_vector->minCoeff(), 0.0);
  // A matrix with a negative inverse entry.
  Mat3 bad;
  bad << 1, 0.9, 0, 0, 1, 0.9, 0, 0, 1;
  EXPECT_FALSE(verify_C1<3>(bad).holds);
}

TEST(Analysis, NonHyperbolicPointsAreFlagged) {
  // All-ones Leslie-Gower: the plane sum x = 1 consists of fixed points.
  const auto q = analyze_point<3>(fixtures::symmetric_plane_lg(), Vec3::Constant(1.0 / 3));
  EXPECT_FALSE(q.hyperbolic);
  EXPECT_EQ(q.s_type, OnSType::NonHyperbolic);
}

TEST(Analysis, AxialVectorIsDiagonalInverse) {
  const Vec3 w = axial_vector(fixtures::class19_aa());
  EXPECT_NEAR(w[0], 1.0, 1e-15);
  EXPECT_NEAR(w[1], 1.0, 1e-15);
  EXPECT_NEAR(w[2], 1.0, 1e-15);
}

TEST(Analysis, GeneralDimensionCensus) {
  ParameterSetX p;
  p.r = VecX::Ones(4);
  p.A = MatX::Constant(4, 4, 0.5);
  p.A.diagonal().setOnes();
  const auto census = find_all_fixed_points(make_leslie_gower<Eigen::Dynamic>(p));
  EXPECT_EQ(census.points.size(), 16u);  // every support of a symmetric system
  for (const auto& pt : census.points) EXPECT_LT(pt.residual, 1e-12);
}
