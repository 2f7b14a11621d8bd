#include "bubblelab/deform.hpp"
#include "bubblelab/fixtures.hpp"
#include "bubblelab/operators.hpp"
#include "bubblelab/standard.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bubblelab;

namespace {

const Vec kPole = Eigen::Vector3d(0, 0, 1);

IntegrationConfig exact() {
  IntegrationConfig c;
  c.backend = IntegrationBackend::exact_s2;
  return c;
}

IntegrationConfig mc(long long samples, std::uint64_t seed = 1) {
  IntegrationConfig c;
  c.backend = IntegrationBackend::monte_carlo;
  c.mc.samples = samples;
  c.mc.seed = seed;
  return c;
}

Mat on_E(const Mat& M) {
  const Mat B = simplex_basis(static_cast<int>(M.rows()));
  return B.transpose() * M * B;
}

double perimeter_of(const ClusterParams& P) { return measure_exact_s2(P).total_perimeter; }

}  // namespace

TEST(OpC, EqualVolumeGram) {
  const ClusterParams P = equal_volume_standard(3, 5);
  const Mat C = op_C(P).matrix;
  EXPECT_LE((on_E(C * C.transpose()) - 0.5 * Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(OpC, PoleIsInTheKernel) {
  const ClusterParams P = fixtures::kite();
  EXPECT_LE((op_C(P).matrix * kPole).cwiseAbs().maxCoeff(), 1e-15);
  const Mat H = op_C(fixtures::hemispheres(2)).matrix;
  EXPECT_LE((H.row(0) + H.row(1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(OpN, EqualVolumeLunes) {
  const ClusterParams P = equal_volume_standard(2, 3);
  const InterfaceGraph g = detect_interfaces(P);
  const Mat N = op_N(P, g, exact()).matrix;
  Mat expect = Mat::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) expect += 0.25 * e_ij(3, i, j) * P.cij(i, j).transpose();
  EXPECT_LE((N - expect).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((N - 0.75 * P.centers).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OpN, PoleColumnVanishes) {
  const ClusterParams P = fixtures::kite();
  const AmbientOperator N = op_N(P, detect_interfaces(P), mc(100000));
  for (int i = 0; i < 4; ++i) EXPECT_LE(std::abs(N.matrix(i, 2)), 4 * N.stderr_(i, 2) + 1e-12);
}

TEST(OpN, CapBackendsAgree) {
  const ClusterParams P = fixtures::cap(1 / std::sqrt(3.0));
  const InterfaceGraph g = detect_interfaces(P);
  const AmbientOperator a = op_N(P, g, exact());
  const AmbientOperator b = op_N(P, g, mc(200000));
  for (Eigen::Index k = 0; k < a.matrix.size(); ++k)
    EXPECT_LE(std::abs(a.matrix.data()[k] - b.matrix.data()[k]), 4 * b.stderr_.data()[k] + 1e-12);
}

TEST(OpF, EqualVolumeIsThreeQuartersIdentity) {
  const ClusterParams P = equal_volume_standard(2, 3);
  const InterfaceGraph g = detect_interfaces(P);
  const SimplexOperator F = op_F_pcf(P, g, Vec::Zero(3), exact());
  const SimplexOperator F0 = op_F0(P, g, kPole, exact());
  EXPECT_LE((on_E(F.matrix) - 0.75 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((on_E(F0.matrix) - 0.75 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(check_trace_identity(F, P.kappa, 0.75), 0.0, 1e-12);
}

TEST(OpF, RejectsWrongCompatibilityVector) {
  const ClusterParams P = fixtures::cap(0.5);
  EXPECT_THROW(op_F_pcf(P, detect_interfaces(P), Eigen::Vector3d(0.1, 0.2, 0.3), exact()), DomainError);
  EXPECT_THROW(op_F0(P, detect_interfaces(P), Eigen::Vector3d(1, 0, 0), exact()), DomainError);
}

TEST(OpF, SymmetricAndAnnihilatesConstants) {
  const ClusterParams P = conformal_step(fixtures::kite(), kPole, 0.5);
  const auto f = pcf_detect(P);
  ASSERT_TRUE(f);
  const SimplexOperator F = op_F_pcf(P, detect_interfaces(P), f->xi, mc(20000));
  EXPECT_LE((F.matrix - F.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((F.matrix * Vec::Ones(4)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(OpF, ConformallyFlatIsPositiveDefinite) {
  int seen = 0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const ClusterParams P = fixtures::random_standard_s2(s);
    const auto f = pcf_detect(P);
    ASSERT_TRUE(f);
    if (!f->conformally_flat) continue;
    ++seen;
    const SimplexOperator F = op_F_pcf(P, detect_interfaces(P), f->xi, exact());
    EXPECT_TRUE(check_positive_definite(F.matrix).positive_definite);
  }
  EXPECT_GT(seen, 3);
}

TEST(OpF, PerpendicularPcfEqualsF0) {
  for (const ClusterParams& P : {fixtures::cap(0.4), fixtures::cap(-1.1), equal_volume_standard(2, 3)}) {
    const InterfaceGraph g = detect_interfaces(P);
    const auto f = pcf_detect(P);
    const auto N = perpendicular_pole(P);
    ASSERT_TRUE(f && N);
    const Mat F = op_F_pcf(P, g, f->xi, exact()).matrix;
    const Mat F0 = op_F0(P, g, *N, exact()).matrix;
    EXPECT_LE((F - F0).cwiseAbs().maxCoeff(), 1e-12) << P.label;
  }
}

TEST(OpF, FCEqualsNOnStandardBubbles) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const ClusterParams P = fixtures::random_standard_s2(s);
    const InterfaceGraph g = detect_interfaces(P);
    const auto f = pcf_detect(P);
    ASSERT_TRUE(f);
    const SimplexOperator F = op_F_pcf(P, g, f->xi, exact());
    const FcnResidual r = check_FC_eq_N(F, op_C(P), op_N(P, g, exact()), perimeter_of(P));
    EXPECT_LE(r.max_abs, 1e-10);
    EXPECT_LE(std::abs(r.trace_residual), 1e-10);
    EXPECT_LE(std::abs(check_trace_identity(F, P.kappa, perimeter_of(P))), 1e-10);
  }
}

TEST(OpF, ZeroOperatorResidualIsN) {
  const ClusterParams P = fixtures::random_standard_s2(1);
  const InterfaceGraph g = detect_interfaces(P);
  const AmbientOperator N = op_N(P, g, exact());
  SimplexOperator Z;
  Z.matrix = Mat::Zero(P.q, P.q);
  EXPECT_NEAR(check_FC_eq_N(Z, op_C(P), N, 1.0).max_abs, N.matrix.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Estimators, MonteCarloIdentitiesOnS3) {
  const ClusterParams P = conformal_step(fixtures::lift(fixtures::kite(), 1), Eigen::Vector4d(0, 0, 1, 0), 0.5);
  const InterfaceGraph g = detect_interfaces(P);
  const auto f = pcf_detect(P);
  ASSERT_TRUE(f);
  const IntegrationConfig c = mc(100000, 3);
  EXPECT_LE(fc_minus_n(P, g, psi_weight(f->xi), c).max_sigma(), 4.0);
  EXPECT_LE(trace_residual(P, g, psi_weight(f->xi), c).sigma(), 4.0);
}

TEST(Estimators, F0TraceAndPositivityOnPerpendicularClusters) {
  for (const ClusterParams& P : {fixtures::kite(), fixtures::hemispheres(3)}) {
    const InterfaceGraph g = detect_interfaces(P);
    const auto N = perpendicular_pole(P);
    ASSERT_TRUE(N);
    const IntegrationConfig c = mc(100000, 5);
    EXPECT_LE(trace_residual(P, g, f0_weight(*N, P.n), c).sigma(), 4.0) << P.label;
    const Estimate lm = lambda_min_estimate(op_F0(P, g, *N, c));
    EXPECT_GT(lm.value - 5 * lm.stderr_, 0.0) << P.label;
  }
}

TEST(Estimators, ErrorShrinksWithSamples) {
  const ClusterParams P = conformal_step(fixtures::lift(fixtures::kite(), 1), Eigen::Vector4d(0, 0, 1, 0), 0.5);
  const InterfaceGraph g = detect_interfaces(P);
  const Vec xi = pcf_detect(P)->xi;
  const double a = trace_residual(P, g, psi_weight(xi), mc(10000)).stderr_;
  const double b = trace_residual(P, g, psi_weight(xi), mc(40000)).stderr_;
  const double c = trace_residual(P, g, psi_weight(xi), mc(160000)).stderr_;
  EXPECT_NEAR(a / b, 2.0, 0.4);
  EXPECT_NEAR(b / c, 2.0, 0.4);
}

TEST(Equivariance, Permutation) {
  const ClusterParams P = conformal_step(fixtures::kite(), kPole, 0.7);
  const std::vector<int> perm = {2, 0, 3, 1};
  const ClusterParams Q = permute(P, perm);
  Mat Pi = Mat::Zero(4, 4);
  for (int k = 0; k < 4; ++k) Pi(k, perm[k]) = 1;
  const Mat F = op_F_pcf(P, detect_interfaces(P), pcf_detect(P)->xi, exact()).matrix;
  const Mat G = op_F_pcf(Q, detect_interfaces(Q), pcf_detect(Q)->xi, exact()).matrix;
  EXPECT_LE((G - Pi * F * Pi.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const Mat N = op_N(P, detect_interfaces(P), exact()).matrix;
  const Mat M = op_N(Q, detect_interfaces(Q), exact()).matrix;
  EXPECT_LE((M - Pi * N).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Equivariance, Rotation) {
  const ClusterParams P = fixtures::kite();
  const Mat R = random_orthogonal(3, 21);
  const ClusterParams Q = rotate(P, R);
  const Mat F = op_F0(P, detect_interfaces(P), kPole, exact()).matrix;
  const Mat G = op_F0(Q, detect_interfaces(Q), R * kPole, exact()).matrix;
  EXPECT_LE((F - G).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((op_C(Q).matrix - op_C(P).matrix * R.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  const Mat N = op_N(P, detect_interfaces(P), exact()).matrix;
  const Mat M = op_N(Q, detect_interfaces(Q), exact()).matrix;
  EXPECT_LE((M - N * R.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Locality, PcfClusterHasNoEmptyPairWeight) {
  const ClusterParams P = fixtures::five_cluster();
  const InterfaceGraph g = detect_interfaces(P);
  const auto f = pcf_detect(P);
  ASSERT_TRUE(f);
  const LocalityReport r = locality_probe(op_F_pcf(P, g, f->xi, exact()), g);
  EXPECT_EQ(r.empty_pairs.size(), 3u);
  EXPECT_LE(r.max_empty, 1e-15);
}

TEST(Locality, StandardBubbleIsVacuous) {
  const ClusterParams P = equal_volume_standard(2, 3);
  const InterfaceGraph g = detect_interfaces(P);
  EXPECT_TRUE(locality_probe(op_F_pcf(P, g, Vec::Zero(3), exact()), g).empty_pairs.empty());
}

TEST(Locality, SyntheticOperatorIsFlagged) {
  SimplexOperator F;
  F.matrix = Mat::Identity(4, 4) - Mat::Constant(4, 4, 0.25);
  const LocalityReport r = locality_probe(F, InterfaceGraph::empty(4));
  EXPECT_NEAR(r.max_empty, 0.25, 1e-15);
  EXPECT_LE((assemble_laplacian(decompose_laplacian(F.matrix)) - F.matrix).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ConformalLimit, ExactBackendConvergesToF0) {
  const ClusterParams P = fixtures::kite();
  const InterfaceGraph g = detect_interfaces(P);
  const ConformalLimitReport r = conformal_limit(P, g, kPole, {0.2, 0.1, 0.05}, exact());
  EXPECT_TRUE(r.monotone);
  EXPECT_GT(r.norms[0], r.norms[2]);
  EXPECT_LE(r.extrapolated.max_abs(), 4 * r.truncation.cwiseAbs().maxCoeff() + 1e-12);
  const Mat F0 = op_F0(P, g, kPole, exact()).matrix;
  EXPECT_LE((r.f0.value - F0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ConformalLimit, PulledBackDifferenceMatchesDirectAssembly) {
  const ClusterParams P = fixtures::kite();
  const InterfaceGraph g = detect_interfaces(P);
  const ConformalLimitReport r = conformal_limit(P, g, kPole, {0.3}, exact());
  const Mat direct = conformal_F(P, g, kPole, 0.3, exact()).matrix - op_F0(P, g, kPole, exact()).matrix;
  EXPECT_LE((r.diff[0].value - direct).cwiseAbs().maxCoeff(), 1e-10);
}
