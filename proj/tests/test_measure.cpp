#include "bubblelab/fixtures.hpp"
#include "bubblelab/measure.hpp"
#include "bubblelab/standard.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace bubblelab;

namespace {

McConfig mc(long long samples, std::uint64_t seed = 1) {
  McConfig c;
  c.samples = samples;
  c.seed = seed;
  return c;
}

IntegrationConfig exact() {
  IntegrationConfig c;
  c.backend = IntegrationBackend::exact_s2;
  return c;
}

double max_z(const Mat& a, const Mat& b, const Mat& se) {
  double z = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = std::abs(a.data()[i] - b.data()[i]);
    z = std::max(z, d / std::max(se.data()[i], 1e-12));
  }
  return z;
}

Mat E_identity(int q) { return q * Mat::Identity(q, q) - Mat::Ones(q, q); }

}  // namespace

TEST(MeasureMc, Hemispheres) {
  const ClusterParams P = fixtures::hemispheres(2);
  const MeasureReport m = measure_mc(P, detect_interfaces(P), mc(200000));
  EXPECT_NEAR(m.volumes(0), 0.5, 4 * m.volume_stderr(0));
  EXPECT_NEAR(m.areas(0, 1), 0.5, 4 * m.area_stderr(0, 1) + 1e-12);
  EXPECT_EQ(m.backend, "monte_carlo");
}

TEST(MeasureMc, EqualVolumeDoubleBubble) {
  const ClusterParams P = equal_volume_standard(2, 3);
  const MeasureReport m = measure_mc(P, detect_interfaces(P), mc(200000));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(m.volumes(i), 1.0 / 3, 4 * m.volume_stderr(i));
  EXPECT_NEAR(m.total_perimeter, 0.75, 4 * m.perimeter_stderr + 1e-12);
}

TEST(MeasureMc, EqualVolumeInHigherDimensions) {
  for (auto [n, q] : {std::pair{3, 5}, {4, 4}}) {
    const ClusterParams P = equal_volume_standard(n, q);
    const MeasureReport m = measure_mc_volumes(P, mc(100000, 3));
    for (int i = 0; i < q; ++i) EXPECT_NEAR(m.volumes(i), 1.0 / q, 4 * m.volume_stderr(i));
  }
}

TEST(MeasureMc, PerimeterIsSumOfAreas) {
  const ClusterParams P = fixtures::five_cluster();
  const MeasureReport m = measure_mc(P, detect_interfaces(P), mc(50000));
  EXPECT_NEAR(m.total_perimeter, m.areas.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().sum(), 1e-12);
  EXPECT_GE(m.volumes.minCoeff(), 0.0);
  EXPECT_LE(std::abs(m.volumes.sum() - 1), 3 * m.volume_stderr.norm() + 1e-12);
}

TEST(MeasureMc, ReproducibleAndWorkerIndependent) {
  const ClusterParams P = fixtures::kite();
  const InterfaceGraph g = detect_interfaces(P);
  McConfig a = mc(30000, 4), b = a;
  a.workers = 1;
  b.workers = 4;
  const MeasureReport x = measure_mc(P, g, a), y = measure_mc(P, g, b);
  EXPECT_EQ(x.volumes, y.volumes);
  EXPECT_EQ(x.areas, y.areas);
}

TEST(MeasureMc, StderrHalvesWhenSamplesQuadruple) {
  const ClusterParams P = fixtures::kite();
  const InterfaceGraph g = detect_interfaces(P);
  const MeasureReport a = measure_mc(P, g, mc(25000)), b = measure_mc(P, g, mc(100000));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.volume_stderr(i) / b.volume_stderr(i), 2.0, 0.4);
}

TEST(MeasureMc, RejectsNonPositiveSamples) {
  const ClusterParams P = fixtures::hemispheres(2);
  EXPECT_THROW(measure_mc(P, detect_interfaces(P), mc(0)), DomainError);
}

TEST(MeasureExact, Hemispheres) {
  const MeasureReport m = measure_exact_s2(fixtures::hemispheres(2));
  EXPECT_NEAR(m.volumes(0), 0.5, 1e-14);
  EXPECT_NEAR(m.areas(0, 1), 0.5, 1e-14);
}

TEST(MeasureExact, EqualVolumeLunes) {
  const MeasureReport m = measure_exact_s2(equal_volume_standard(2, 3));
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) EXPECT_NEAR(m.areas(i, j), 0.25, 1e-12);
}

TEST(MeasureExact, QuarterCap) {
  const MeasureReport m = measure_exact_s2(fixtures::cap(1 / std::sqrt(3.0)));
  EXPECT_NEAR(m.volumes.minCoeff(), 0.25, 1e-12);
  EXPECT_NEAR(m.volumes.maxCoeff(), 0.75, 1e-12);
  EXPECT_NEAR(m.total_perimeter, std::sqrt(3.0) / 4, 1e-12);
}

TEST(MeasureExact, AgreesWithMonteCarlo) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const ClusterParams P = fixtures::random_standard_s2(s);
    const MeasureReport e = measure_exact_s2(P);
    const MeasureReport m = measure_mc(P, detect_interfaces(P), mc(200000, s + 1));
    EXPECT_LE(max_z(m.volumes, e.volumes, m.volume_stderr), 4.0) << P.label;
    EXPECT_LE(max_z(m.areas, e.areas, m.area_stderr), 4.0) << P.label;
  }
  const ClusterParams K = fixtures::kite();
  const MeasureReport e = measure_exact_s2(K);
  const MeasureReport m = measure_mc(K, detect_interfaces(K), mc(200000, 9));
  EXPECT_LE(max_z(m.areas, e.areas, m.area_stderr), 4.0);
}

TEST(MeasureExact, OrthogonalInvariance) {
  // includes a five-fold junction, tangent circles and a point contact
  for (const ClusterParams& P : {fixtures::five_cluster(), fixtures::four_lunes(), fixtures::kite(), fixtures::cushion()}) {
    const MeasureReport a = measure_exact_s2(P);
    for (std::uint64_t s = 1; s <= 30; ++s) {
      const MeasureReport b = measure_exact_s2(rotate(P, random_orthogonal(3, s)));
      EXPECT_LE((a.volumes - b.volumes).cwiseAbs().maxCoeff(), 1e-12) << P.label << " " << s;
      EXPECT_LE((a.areas - b.areas).cwiseAbs().maxCoeff(), 1e-12) << P.label << " " << s;
    }
  }
}

TEST(MeasureExact, RejectsHigherDimensions) {
  EXPECT_THROW(measure_exact_s2(equal_volume_standard(3, 3)), DomainError);
}

TEST(MeasureProjected, AgreesWithExactOnS2AndMcOnS3) {
  const ClusterParams P = standard_of_curvature(2, 3, Eigen::Vector3d(0.3, -0.1, -0.2));
  const MeasureReport a = measure_projected(P), b = measure_exact_s2(P);
  EXPECT_LE((a.volumes - b.volumes).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(a.total_perimeter, b.total_perimeter, 1e-10);

  const ClusterParams Q = standard_of_curvature(3, 3, Eigen::Vector3d(0.3, -0.1, -0.2));
  ASSERT_TRUE(projected_applicable(Q));
  const MeasureReport p = measure_projected(Q);
  const MeasureReport m = measure_mc(Q, detect_interfaces(Q), mc(200000, 5));
  EXPECT_LE(max_z(m.volumes, p.volumes, m.volume_stderr), 4.0);
  EXPECT_LE(max_z(m.areas, p.areas, m.area_stderr), 4.0);
}

TEST(RawMeasure, ScalesBySphereAreas) {
  const MeasureReport m = measure_exact_s2(equal_volume_standard(2, 3));
  const MeasureReport r = raw_measure(m, 2);
  EXPECT_FALSE(r.normalized);
  EXPECT_NEAR(r.volumes.sum(), 4 * M_PI, 1e-12);
  EXPECT_NEAR(r.total_perimeter, 3 * M_PI, 1e-12);
}

TEST(WeightedLaplacian, UnitWeightOnLunes) {
  const ClusterParams P = equal_volume_standard(2, 3);
  const InterfaceGraph g = detect_interfaces(P);
  const WeightedLaplacian L = weighted_laplacian(P, g, [](const Vec&) { return 1.0; }, "1", exact());
  EXPECT_LE((L.matrix - 0.25 * E_identity(3)).cwiseAbs().maxCoeff(), 1e-12);
  const Mat B = simplex_basis(3);
  EXPECT_LE((B.transpose() * L.matrix * B - 0.75 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeightedLaplacian, SquaredHeightOnLunes) {
  const ClusterParams P = equal_volume_standard(2, 3);
  const InterfaceGraph g = detect_interfaces(P);
  auto w = [](const Vec& p) { return p(2) * p(2); };
  const WeightedLaplacian L = weighted_laplacian(P, g, w, "<p,N>^2", exact());
  EXPECT_LE((L.matrix - E_identity(3) / 8).cwiseAbs().maxCoeff(), 1e-12);

  IntegrationConfig c;
  c.mc = mc(200000);
  const WeightedLaplacian M = weighted_laplacian(P, g, w, "<p,N>^2", c);
  EXPECT_LE(max_z(M.coeff, L.coeff, M.coeff_stderr), 4.0);
}

TEST(WeightedLaplacian, OddWeightVanishesOnPerpendicularClusters) {
  const ClusterParams P = fixtures::kite();
  const WeightedLaplacian L =
      weighted_laplacian(P, detect_interfaces(P), [](const Vec& p) { return p(2); }, "<p,N>", exact());
  EXPECT_LE(L.matrix.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeightedLaplacian, AnnihilatesConstants) {
  const ClusterParams P = fixtures::five_cluster();
  IntegrationConfig c;
  c.mc = mc(20000);
  const WeightedLaplacian L =
      weighted_laplacian(P, detect_interfaces(P), [](const Vec& p) { return 1 + p(0) * p(0); }, "w", c);
  EXPECT_LE((L.matrix * Vec::Ones(5)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((L.matrix - L.matrix.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PositiveDefinite, ConnectedUnitWeight) {
  const ClusterParams P = fixtures::five_cluster();
  const WeightedLaplacian L =
      weighted_laplacian(P, detect_interfaces(P), [](const Vec&) { return 1.0; }, "1", exact());
  EXPECT_TRUE(check_positive_definite(L.matrix).positive_definite);
}

TEST(PositiveDefinite, CutIsSingular) {
  Mat A = Mat::Zero(4, 4);
  A(0, 1) = A(1, 0) = 0.3;
  A(2, 3) = A(3, 2) = 0.2;
  const PositiveDefiniteReport r = check_positive_definite(assemble_laplacian(A));
  EXPECT_FALSE(r.positive_definite);
  EXPECT_NEAR(r.eigenvalues(0), 0.0, 1e-14);
}

TEST(PositiveDefinite, AbsoluteHeightOnEquatorialCells) {
  const ClusterParams P = fixtures::kite();
  const WeightedLaplacian L = weighted_laplacian(P, detect_interfaces(P),
                                                 [](const Vec& p) { return std::abs(p(2)); }, "|<p,N>|", exact());
  EXPECT_TRUE(check_positive_definite(L.matrix).positive_definite);
}
