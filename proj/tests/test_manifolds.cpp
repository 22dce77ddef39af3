#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace csx;

namespace {

struct Class19 {
  Map3 map = fixtures::class19_lg();
  SimplexMesh mesh = compute_carrying_simplex(map);
  SaddleStructure st = identify_saddle_structure(map);
  PseudoSplitting<3> split = pseudo_splitting(map, st.q.location);
  ManifoldCurve unstable = trace_unstable(map, split, st.attractors);
  ManifoldCurve stable =
      trace_stable_on_S(map, mesh, split, st.repellers[0], st.repellers[1], st.attractors[0], st.attractors[1]);
};

const Class19& sys() {
  static const Class19 s;
  return s;
}

}  // namespace

TEST(Splitting, PerronVectorAndInvariantComplement) {
  const auto& s = sys().split;
  EXPECT_NEAR(s.v.norm(), 1.0, 1e-14);
  EXPECT_GT(s.v.minCoeff(), 0.0);
  EXPECT_LT((s.jacobian * s.v - s.mu * s.v).norm(), 1e-10);
  // W is invariant: the image of each basis vector stays orthogonal to w_normal.
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(s.w_normal.dot(s.jacobian * s.w_basis.col(k)), 0.0, 1e-10);
  EXPECT_NEAR(s.w_normal.dot(s.w_basis.col(0)), 0.0, 1e-14);
  EXPECT_GT(s.mu, 0.0);
  EXPECT_LT(s.mu, s.nu);
  ASSERT_EQ(s.w_eigenvalues.size(), 2u);
  // The restricted matrix carries exactly the non-Perron spectrum.
  Eigen::EigenSolver<MatX> es(s.restricted());
  std::vector<double> re{es.eigenvalues()[0].real(), es.eigenvalues()[1].real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], s.w_eigenvalues[0].real(), 1e-10);
  EXPECT_NEAR(re[1], s.w_eigenvalues[1].real(), 1e-10);
}

TEST(Splitting, RejectsNonC1Points) {
  Mat3 j;
  j << 1, 0.9, 0, 0, 1, 0.9, 0, 0, 1;
  EXPECT_THROW(pseudo_splitting<3>(j, Vec3::Constant(0.3)), Error);
}

TEST(SaddleStructure, ClassNineteenBoundary) {
  const auto& st = sys().st;
  EXPECT_TRUE(st.four_point_boundary());
  EXPECT_EQ(st.attractors[0].id, "a1");
  EXPECT_EQ(fixed_point_name(st.q.location), "q");
  EXPECT_EQ(fixed_point_name(Vec3(0, 0.4, 0.2)), "v23");
  EXPECT_EQ(fixed_point_name(Vec3(1, 0, 0)), "w1");
}

TEST(Unstable, EndsAtTheTwoAttractors) {
  const auto& s = sys();
  const double wn = axial_vector(s.map).norm();
  const auto& c = s.unstable;
  EXPECT_EQ(c.kind, CurveKind::Unstable);
  std::vector<std::string> ends{c.endpoints[0].id, c.endpoints[1].id};
  std::sort(ends.begin(), ends.end());
  EXPECT_EQ(ends, (std::vector<std::string>{"a1", "a2"}));
  EXPECT_LT(std::max(c.endpoints[0].distance, c.endpoints[1].distance), 1e-5 * wn);
  const SurfaceDistance dist(s.mesh);
  const double h = s.mesh.edge_length();
  for (const auto& p : c.points) ASSERT_LT(dist(p), 2 * h);
  // Passes through q.
  EXPECT_LT(detail::point_polyline_distance(s.split.q, c.points), 1e-5 * wn);
  ASSERT_EQ(c.arc_params.size(), c.points.size());
  EXPECT_GT(c.arc_params.back(), 0.0);
}

// Starting an order of magnitude closer to q changes the traced curve by
// far less than the mesh spacing.
TEST(Unstable, SelfConvergesInStartingOffset) {
  const auto& s = sys();
  UnstableOptions fine;
  fine.h0 = 1e-7 * s.split.q.norm();
  const auto c2 = trace_unstable(s.map, s.split, s.st.attractors, fine);
  EXPECT_LT(hausdorff_distance(s.unstable.points, c2.points), 1e-4 * axial_vector(s.map).norm());
}

TEST(Stable, JoinsRepellersThroughQ) {
  const auto& s = sys();
  const double wn = axial_vector(s.map).norm();
  const auto& c = s.stable;
  EXPECT_EQ(c.kind, CurveKind::Stable);
  std::vector<std::string> ends{c.endpoints[0].id, c.endpoints[1].id};
  std::sort(ends.begin(), ends.end());
  EXPECT_EQ(ends, (std::vector<std::string>{"r1", "r2"}));
  EXPECT_LT(std::max(c.endpoints[0].distance, c.endpoints[1].distance), 1e-5 * wn);
  EXPECT_LT(detail::point_polyline_distance(s.split.q, c.points), 1e-7 * wn);
}

TEST(Stable, PointsAreBasinBoundaries) {
  const auto& s = sys();
  const double wn = axial_vector(s.map).norm();
  const std::vector<Vec3> att{s.st.attractors[0].x, s.st.attractors[1].x};
  // Offsetting a mid-curve point across the curve, along the unstable
  // direction, flips the basin.
  const Vec3 eu = s.unstable.points[s.unstable.points.size() / 3] - s.split.q;
  for (std::size_t k = s.stable.points.size() / 4; k < 3 * s.stable.points.size() / 4;
       k += std::max<std::size_t>(1, s.stable.points.size() / 8)) {
    const Vec3 p = s.stable.points[k];
    const Vec3 d = 1e-3 * wn * eu.normalized();
    const auto b1 = basin_of(s.map, radial_project(s.mesh, p + d), att, 50000, 1e-4 * wn);
    const auto b2 = basin_of(s.map, radial_project(s.mesh, p - d), att, 50000, 1e-4 * wn);
    ASSERT_TRUE(b1 && b2);
    EXPECT_NE(*b1, *b2) << p.transpose();
  }
}

TEST(Regions, FourComponents) {
  const auto& s = sys();
  const double wn = axial_vector(s.map).norm();
  const std::vector<Vec3> att{s.st.attractors[0].x, s.st.attractors[1].x};
  const auto ras = raster_basins(s.map, s.mesh, att, s.split.q, 80, 50000, 1e-4 * wn);
  EXPECT_EQ(ras.unresolved, 0);
  const auto rc = count_regions(ras, s.unstable, s.st.repellers[0].x);
  EXPECT_EQ(rc.components, 4);
  EXPECT_EQ(rc.per_label, (std::vector<int>{1, 1, 1, 1}));
}

TEST(Regions, PointInPolygon) {
  const std::vector<Eigen::Vector2d> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_TRUE(point_in_polygon(square, {0.5, 0.5}));
  EXPECT_FALSE(point_in_polygon(square, {1.5, 0.5}));
}

TEST(Foliation, LeafRatioAtQTendsToMu) {
  const auto& s = sys();
  double prev = 1e300;
  for (double t : {1e-4, 5e-5, 2.5e-5}) {
    const double err = std::abs(leaf_ratio_at<3>(s.map, s.split.q, s.split.v, t) - s.split.mu);
    EXPECT_LT(err, 1e-3);
    EXPECT_LE(err, prev * 1.01);
    prev = err;
  }
}

TEST(Foliation, LeafContractionPassesNearQ) {
  const auto rep = leaf_contraction_report(sys().map, sys().split);
  EXPECT_TRUE(rep.pass()) << to_string(rep.status);
  EXPECT_LE(rep.max_ratio, rep.rho);
  EXPECT_GT(rep.samples, 200);
  // A rho below mu is violated at q itself.
  LeafContractionOptions lo;
  lo.rho = 0.5 * sys().split.mu;
  EXPECT_EQ(leaf_contraction_report(sys().map, sys().split, lo).status, LeafStatus::ContractionViolatedAtQ);
}

TEST(Foliation, M2ExpansionSearch) {
  const auto& s = sys().split;
  const double lambda1 = std::abs(s.w_eigenvalues[0]);
  for (double f : {0.5, 0.9, 0.99}) {
    const auto rep = m2_expansion_search(s.restricted(), f * lambda1);
    EXPECT_TRUE(rep.l.has_value()) << f;
  }
  for (double f : {1.0, 1.2}) {
    const auto rep = m2_expansion_search(s.restricted(), f * s.nu);
    EXPECT_FALSE(rep.l.has_value()) << f;
    EXPECT_EQ(rep.searched, 500);
  }
  // Diagonal oracle: ||diag(2, 4)^-l|| = 2^-l < sigma^-l iff sigma < 2.
  MatX d = MatX::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  EXPECT_EQ(m2_expansion_search(d, 1.9).l, 1);
  EXPECT_FALSE(m2_expansion_search(d, 2.0, 50).l.has_value());
}

TEST(Conjugacy, DecayWithinRhoOnMostSamples) {
  const auto& s = sys();
  const auto rep = conjugacy_decay_report(s.map, s.mesh, s.split);
  EXPECT_EQ(rep.samples.size(), 64u);
  EXPECT_GE(rep.pass_fraction, 0.9);
  // A point of q + W is its own leaf projection.
  const Vec3 on_w = s.split.q + 1e-3 * s.split.w_basis.col(0);
  EXPECT_LT((leaf_projection(s.split, on_w) - on_w).norm(), 1e-15);
}

TEST(TangentCone, AngleShrinksTowardQ) {
  const auto& s = sys();
  const double h = s.mesh.edge_length();
  double prev = 1e300;
  for (double f : {8.0, 4.0, 2.0}) {
    const double a = estimate_tangent_cone(s.mesh, s.split.q, f * h, s.split.w_basis).angle_to_W;
    EXPECT_LE(a, prev + 2 * h);
    prev = a;
  }
  EXPECT_GT(estimate_theta(s.mesh, s.split.q, s.split.v, s.split.w_basis, 4 * h), 0.0);
}

TEST(Orbits, FateRecognizesSaddle) {
  const auto& s = sys();
  const std::vector<Vec3> att{s.st.attractors[0].x, s.st.attractors[1].x};
  EXPECT_EQ(orbit_fate(s.map, s.split.q, att, s.split.q, 10, 1e-4, 1e-10), kOnSeparatrix);
  EXPECT_EQ(orbit_fate(s.map, att[1], att, s.split.q, 10, 1e-4, 1e-10), 1);
  EXPECT_EQ(orbit_fate(s.map, Vec3(0.3, 0.3, 0.3), att, Vec3::Constant(5.0), 0, 1e-12, 1e-12), kUnresolved);
}
