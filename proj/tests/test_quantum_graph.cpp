#include "bubblelab/deform.hpp"
#include "bubblelab/fixtures.hpp"
#include "bubblelab/operators.hpp"
#include "bubblelab/quantum_graph.hpp"
#include "bubblelab/standard.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace bubblelab;

namespace {

QuantumGraph graph_of(const ClusterParams& P) { return build_graph(P, detect_interfaces(P)); }

IntegrationConfig exact() {
  IntegrationConfig c;
  c.backend = IntegrationBackend::exact_s2;
  return c;
}

ClusterParams double_bubble() { return standard_of_volume(2, 3, Eigen::Vector3d(0.2, 0.3, 0.5)).params; }

Mat on_E(const Mat& M) {
  const Mat B = simplex_basis(static_cast<int>(M.rows()));
  return B.transpose() * M * B;
}

}  // namespace

TEST(BuildGraph, EqualVolumeDoubleBubble) {
  const QuantumGraph g = graph_of(equal_volume_standard(2, 3));
  ASSERT_EQ(g.arcs.size(), 3u);
  EXPECT_EQ(g.vertices.size(), 2u);
  for (const QgArc& a : g.arcs) {
    EXPECT_NEAR(a.length, std::numbers::pi, 1e-12);
    EXPECT_NEAR(a.kappa, 0.0, 1e-15);
    EXPECT_FALSE(a.periodic);
  }
}

TEST(BuildGraph, CapIsOnePeriodicArc) {
  const QuantumGraph g = graph_of(fixtures::cap(0.5));
  ASSERT_EQ(g.arcs.size(), 1u);
  EXPECT_TRUE(g.arcs[0].periodic);
  EXPECT_TRUE(g.vertices.empty());
}

TEST(BuildGraph, LengthsMatchPerimeterAndRobinCoefficients) {
  const ClusterParams P = double_bubble();
  const QuantumGraph g = graph_of(P);
  double total = 0;
  for (const QgArc& a : g.arcs) {
    total += a.length;
    const int k = 3 - a.i - a.j;
    const double robin = (P.kij(a.i, k) + P.kij(a.j, k)) / std::sqrt(3.0);
    EXPECT_NEAR(std::abs(a.robin_start), std::abs(robin), 1e-12);
    EXPECT_NEAR(std::abs(a.robin_end), std::abs(robin), 1e-12);
  }
  EXPECT_NEAR(total / (4 * std::numbers::pi), measure_exact_s2(P).total_perimeter, 1e-12);
  for (const QgVertex& v : g.vertices) EXPECT_EQ(v.cells, (std::array<int, 3>{0, 1, 2}));
}

TEST(BuildGraph, RejectsHigherDimensions) {
  const ClusterParams P = equal_volume_standard(3, 3);
  EXPECT_THROW(build_graph(P, detect_interfaces(P)), DomainError);
}

TEST(Assemble, ReducedSystemIsSymmetric) {
  const JacobiSystem s = assemble_jacobi(graph_of(double_bubble()), 0.01);
  EXPECT_LE(Mat(Mat(s.Ar) - Mat(s.Ar).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(Mat(Mat(s.Mr) - Mat(s.Mr).transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assemble, RejectsCoarseGrids) {
  EXPECT_THROW(assemble_jacobi(graph_of(double_bubble()), 0.5), DomainError);
}

TEST(Spectrum, CircleConvergesQuadratically) {
  const QuantumGraph g = graph_of(fixtures::hemispheres(2));
  const std::vector<double> want = {1, 0, 0, -3, -3, -8, -8};
  double err[2];
  const double hs[2] = {0.02, 0.01};
  for (int r = 0; r < 2; ++r) {
    const Spectrum sp = eigen_count_positive(assemble_jacobi(g, hs[r]), 1e-3, 7, 1e-3);
    ASSERT_GE(sp.eigenvalues.size(), 7);
    err[r] = 0;
    for (int k = 0; k < 7; ++k) err[r] = std::max(err[r], std::abs(sp.eigenvalues(k) - want[k]));
    EXPECT_EQ(sp.count, 1);
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.4);
}

TEST(Spectrum, DoubleBubbleHasTwoPositiveEigenvalues) {
  // kernel modes sit at +O(h^2); the threshold clears them at this resolution
  for (const Vec& v : {Vec(Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3)), Vec(Eigen::Vector3d(0.2, 0.3, 0.5))}) {
    const QuantumGraph g = graph_of(standard_of_volume(2, 3, v).params);
    const Spectrum a = eigen_count_positive(assemble_jacobi(g, 0.01), 1e-3, 6, 1e-3);
    const Spectrum b = eigen_count_positive(assemble_jacobi(g, 0.005), 1e-3, 6, 1e-3);
    EXPECT_EQ(a.count, 2);
    EXPECT_EQ(b.count, 2);
    EXPECT_GE(b.kernel_dim, 2);
  }
}

TEST(Spectrum, FineGridCountWithDefaultThreshold) {
  const SpectrumCheck sc = eigen_count_refined(graph_of(double_bubble()), 1e-3);
  EXPECT_TRUE(sc.consistent);
  EXPECT_EQ(sc.fine.count, 2);
}

TEST(Fields, SkewFieldsAreInTheKernel) {
  const ClusterParams P = double_bubble();
  const QuantumGraph g = graph_of(P);
  const Vec a = Eigen::Vector3d(0.7, -0.2, -0.5);
  double res[2];
  const double hs[2] = {0.02, 0.01};
  for (int r = 0; r < 2; ++r) {
    const JacobiSystem sys = assemble_jacobi(g, hs[r]);
    const DiscreteField zero = sample_field(g, sys, [](int, const Eigen::Vector3d&) { return 0.0; });
    const DiscreteField f = sample_field(g, sys, [&](int k, const Eigen::Vector3d& p) {
      return (a(g.arcs[k].i) - a(g.arcs[k].j)) * p(2);
    });
    const FieldResidual fr = jacobi_residual(g, sys, f, zero);
    res[r] = std::max(fr.interior, fr.vertex);
    EXPECT_LE(fr.kirchhoff, 1e-12);
    EXPECT_LE(volume_derivative(g, sys, f).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_GE(std::log2(res[0] / res[1]), 1.8);
}

TEST(Fields, MoebiusFieldResidual) {
  const ClusterParams P = double_bubble();
  const QuantumGraph g = graph_of(P);
  const Eigen::Vector3d th = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  double res[2];
  const double hs[2] = {0.02, 0.01};
  for (int r = 0; r < 2; ++r) {
    const JacobiSystem sys = assemble_jacobi(g, hs[r]);
    const DiscreteField f = sample_field(g, sys, [&](int k, const Eigen::Vector3d& p) {
      const QgArc& A = g.arcs[k];
      return th.dot(Eigen::Vector3d(P.cij(A.i, A.j) + A.kappa * Vec(p)));
    });
    const DiscreteField t = sample_field(g, sys, [&](int k, const Eigen::Vector3d&) {
      return th.dot(Eigen::Vector3d(P.cij(g.arcs[k].i, g.arcs[k].j)));
    });
    const FieldResidual fr = jacobi_residual(g, sys, f, t);
    res[r] = std::max(fr.interior, fr.vertex);
  }
  EXPECT_GE(std::log2(res[0] / res[1]), 1.8);
}

TEST(VolumeDerivative, ConstantsGiveUnitLaplacian) {
  const ClusterParams P = double_bubble();
  const QuantumGraph g = graph_of(P);
  const JacobiSystem sys = assemble_jacobi(g, 0.01);
  const Vec a = Eigen::Vector3d(0.4, 0.1, -0.5);
  const DiscreteField f =
      sample_field(g, sys, [&](int k, const Eigen::Vector3d&) { return a(g.arcs[k].i) - a(g.arcs[k].j); });
  const WeightedLaplacian L1 =
      weighted_laplacian(P, detect_interfaces(P), [](const Vec&) { return 1.0; }, "1", exact());
  EXPECT_LE((volume_derivative(g, sys, f) - L1.matrix * a).cwiseAbs().maxCoeff(), 1e-12);
  const DiscreteField z = sample_field(g, sys, [](int, const Eigen::Vector3d&) { return 0.0; });
  EXPECT_EQ(volume_derivative(g, sys, z).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ConformalJacobi, EqualVolumeDiscreteF) {
  const QuantumGraph g = graph_of(equal_volume_standard(2, 3));
  const Mat F = discrete_F(g, assemble_jacobi(g, 0.01));
  EXPECT_LE((on_E(F) - 0.75 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(ConformalJacobi, PcfFieldAndOperator) {
  const ClusterParams P = double_bubble();
  const auto fit = pcf_detect(P);
  ASSERT_TRUE(fit);
  const QuantumGraph g = graph_of(P);
  const Mat Fex = op_F_pcf(P, detect_interfaces(P), fit->xi, exact()).matrix;
  double err[2];
  const double hs[2] = {0.02, 0.01};
  for (int r = 0; r < 2; ++r) {
    const JacobiSystem sys = assemble_jacobi(g, hs[r]);
    err[r] = (discrete_F(g, sys) - Fex).cwiseAbs().maxCoeff();
    const Vec a = Eigen::Vector3d(0.5, -0.1, -0.4);
    const ConformalJacobiResult cj = conformal_jacobi_solve(g, sys, a);
    const DiscreteField want = sample_field(g, sys, [&](int k, const Eigen::Vector3d& p) {
      return (a(g.arcs[k].i) - a(g.arcs[k].j)) * (1 - Vec(p).dot(fit->xi));
    });
    double fe = 0;
    for (std::size_t k = 0; k < want.values.size(); ++k)
      fe = std::max(fe, (cj.f.values[k] - want.values[k]).cwiseAbs().maxCoeff());
    EXPECT_LE(fe, 1e-2) << hs[r];
    // Q(f^a, f^a) = -(n - 1) a^T F a
    EXPECT_NEAR(cj.index_form, -a.dot(Fex * a), 1e-3);
  }
  EXPECT_LE(err[1], 1e-3);
  EXPECT_GE(std::log2(err[0] / err[1]), 1.5);
}

TEST(ConformalJacobi, ZeroRightSide) {
  const QuantumGraph g = graph_of(double_bubble());
  const ConformalJacobiResult cj = conformal_jacobi_solve(g, assemble_jacobi(g, 0.02), Vec::Zero(3));
  EXPECT_LE(cj.delta_V.cwiseAbs().maxCoeff(), 1e-12);
}
