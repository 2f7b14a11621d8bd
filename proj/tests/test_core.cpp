#include "bubblelab/core.hpp"
#include "bubblelab/fixtures.hpp"
#include "bubblelab/sampling.hpp"
#include "bubblelab/standard.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace bubblelab;

namespace {

ClusterParams halves() {
  Mat C(2, 3);
  C << 0.5, 0, 0, -0.5, 0, 0;
  return make_cluster(2, C, Vec::Zero(2));
}

Vec unit(double x, double y, double z) { return Eigen::Vector3d(x, y, z).normalized(); }

}  // namespace

TEST(ClassifyPoint, EquatorIsATie) {
  EXPECT_EQ(classify_point(halves(), unit(0, 0, 1)), (std::vector<int>{0, 1}));
}

TEST(ClassifyPoint, MinimizerWins) {
  EXPECT_EQ(classify_point(halves(), unit(-1, 0, 0)), (std::vector<int>{0}));
  EXPECT_EQ(argmin_cell(halves(), unit(1, 0.2, 0)), 1);
}

TEST(ClassifyPoint, PoleOfEqualVolumeDoubleBubbleIsTriple) {
  EXPECT_EQ(classify_point(equal_volume_standard(2, 3), unit(0, 0, 1)), (std::vector<int>{0, 1, 2}));
}

TEST(ClassifyPoint, RejectsNonUnitPoints) {
  EXPECT_THROW(classify_point(halves(), Eigen::Vector3d(0, 0, 2)), DomainError);
}

TEST(ClassifyPoint, TiesHaveProbabilityZero) {
  const ClusterParams P = fixtures::kite();
  int ties = 0;
  const int m = 100000;
  for (int k = 0; k < m; ++k) {
    CounterRng rng(5, 1, static_cast<std::uint64_t>(k));
    if (classify_point(P, rng.unit_vec(3), 0.0).size() > 1) ++ties;
  }
  EXPECT_LE(static_cast<double>(ties) / m, 1e-4);
}

TEST(ClassifyPoint, RecenteringDoesNotChangeCells) {
  const ClusterParams P = fixtures::kite();
  Mat C = P.centers;
  Vec k = P.kappa;
  C.rowwise() += Eigen::RowVector3d(0.3, -1.2, 0.7);
  k.array() += 2.5;
  double corr = 0;
  const ClusterParams Q = make_cluster(2, C, k, {}, &corr);
  EXPECT_GT(corr, 1.0);
  check_conventions(Q);
  for (int s = 0; s < 2000; ++s) {
    CounterRng rng(9, 2, static_cast<std::uint64_t>(s));
    const Vec p = rng.unit_vec(3);
    EXPECT_EQ(classify_point(P, p), classify_point(Q, p));
  }
}

TEST(MakeCluster, ConventionsHold) {
  Mat C(3, 3);
  C << 1, 2, 3, 4, 5, 6, 7, 8, 10;
  const ClusterParams P = make_cluster(2, C, Eigen::Vector3d(1, 2, 4));
  EXPECT_LE(P.centers.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(std::abs(P.kappa.sum()), 1e-12);
}

TEST(SimplexBasis, OrthonormalAndSumFree) {
  for (int q = 2; q <= 7; ++q) {
    const Mat B = simplex_basis(q);
    EXPECT_LE((B.transpose() * B - Mat::Identity(q - 1, q - 1)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((Vec::Ones(q).transpose() * B).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(SphereArea, ClosedForms) {
  EXPECT_NEAR(sphere_area(1), 2 * M_PI, 1e-14);
  EXPECT_NEAR(sphere_area(2), 4 * M_PI, 1e-13);
  EXPECT_NEAR(sphere_area(3), 2 * M_PI * M_PI, 1e-13);
}

TEST(DetectInterfaces, EqualVolumeDoubleBubbleHasAllPairs) {
  const InterfaceGraph g = detect_interfaces(equal_volume_standard(2, 3));
  EXPECT_EQ(g.pairs().size(), 3u);
}

TEST(DetectInterfaces, Hemispheres) {
  const InterfaceGraph g = detect_interfaces(fixtures::hemispheres(2));
  EXPECT_TRUE(g.has(0, 1));
}

TEST(DetectInterfaces, FiveClusterHasSevenInterfaces) {
  const InterfaceGraph g = detect_interfaces(fixtures::five_cluster());
  EXPECT_EQ(g.pairs(), fixtures::five_cluster_pairs());
  EXPECT_FALSE(g.affine_only);
}

TEST(DetectInterfaces, WitnessesLieOnTheirInterfaces) {
  for (const ClusterParams& P : {fixtures::kite(), fixtures::five_cluster(), equal_volume_standard(3, 4)}) {
    const InterfaceGraph g = detect_interfaces(P);
    for (const auto& [ij, p] : g.witness) {
      const auto [i, j] = ij;
      EXPECT_LE(std::abs(P.cij(i, j).dot(p) + P.kij(i, j)), 1e-9);
      const auto I = classify_point(P, p, 1e-9);
      EXPECT_TRUE(std::count(I.begin(), I.end(), i) && std::count(I.begin(), I.end(), j));
    }
  }
}

TEST(DetectInterfaces, TouchingCellsAreNotAnInterface) {
  // cells 1 and 2 of the cushion meet in a single point
  const InterfaceGraph g = detect_interfaces(fixtures::cushion());
  EXPECT_FALSE(g.has(0, 1));
  EXPECT_TRUE(g.has(0, 2));
  EXPECT_TRUE(g.has(1, 2));
}

TEST(ValidateSpherical, EqualVolumeResidualIsZero) {
  for (int n = 2; n <= 5; ++n) {
    const ClusterParams P = equal_volume_standard(n, n + 2);
    const SphericalReport r = validate_spherical(P, InterfaceGraph::complete(P.q));
    EXPECT_TRUE(r.passes);
    EXPECT_LE(r.max_residual, 1e-14);
  }
}

TEST(ValidateSpherical, DegenerateQuasiCentersFail) {
  Mat C(2, 3);
  C << -1, 1, 0, 1, 1, 0;
  const ClusterParams P = make_cluster(2, C, Eigen::Vector2d(1, 1));
  const SphericalReport r = validate_spherical(P, InterfaceGraph::complete(2));
  ASSERT_FALSE(r.passes);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NEAR(r.violations[0].residual, 3.0, 1e-12);
}

TEST(ValidateSpherical, RotationInvariant) {
  const ClusterParams P = fixtures::five_cluster();
  const InterfaceGraph g = InterfaceGraph::complete(P.q);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const ClusterParams Q = rotate(P, random_orthogonal(3, s));
    for (auto [i, j] : g.pairs()) EXPECT_NEAR(spherical_residual(P, i, j), spherical_residual(Q, i, j), 1e-12);
  }
}

TEST(PerpendicularPole, EqualVolumeDoubleBubble) {
  const auto N = perpendicular_pole(equal_volume_standard(2, 3));
  ASSERT_TRUE(N.has_value());
  EXPECT_NEAR(std::abs((*N)(2)), 1.0, 1e-12);
}

TEST(PerpendicularPole, FullDimensionalHasNone) {
  EXPECT_FALSE(perpendicular_pole(equal_volume_standard(2, 4)).has_value());
}

TEST(PerpendicularPole, LowCellCountAlwaysHasOne) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const int n = 2 + static_cast<int>(s % 3);
    const ClusterParams P = standard_of_curvature(n, n + 1, fixtures::random_kappa(n + 1, s));
    const ClusterParams Q = rotate(P, random_orthogonal(n + 1, s + 11));
    const auto N = perpendicular_pole(Q);
    ASSERT_TRUE(N.has_value());
    EXPECT_LE((Q.centers * *N).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(RandomOrthogonal, IsOrthogonal) {
  const Mat Q = random_orthogonal(5, 3);
  EXPECT_LE((Q.transpose() * Q - Mat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-13);
}
