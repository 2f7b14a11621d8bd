#include "bubblelab/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bubblelab;

TEST(CounterRng, StreamsAreReproducible) {
  CounterRng a(3, 7, 11), b(3, 7, 11), c(3, 7, 12);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(CounterRng, UniformIsOpenInterval) {
  CounterRng r(1, 2, 3);
  double lo = 1, hi = 0, sum = 0;
  for (int k = 0; k < 100000; ++k) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 4 * std::sqrt(1.0 / 12 / 100000));
}

TEST(CounterRng, UnitVectorsAreUnitAndCentered) {
  Vec mean = Vec::Zero(4);
  const int m = 20000;
  for (int k = 0; k < m; ++k) {
    CounterRng r(2, 0, static_cast<std::uint64_t>(k));
    const Vec u = r.unit_vec(4);
    EXPECT_NEAR(u.norm(), 1.0, 1e-14);
    mean += u;
  }
  EXPECT_LE((mean / m).cwiseAbs().maxCoeff(), 4 * std::sqrt(0.25 / m));
}

TEST(SampleMean, IndependentOfWorkerCount) {
  auto fn = [](long long i, Vec& out) {
    CounterRng r(4, 1, static_cast<std::uint64_t>(i));
    out(0) = r.uniform();
    out(1) = r.normal();
  };
  const SampleStats a = sample_mean(100003, 2, fn, 1);
  const SampleStats b = sample_mean(100003, 2, fn, 3);
  const SampleStats c = sample_mean(100003, 2, fn, 8);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.mean, c.mean);
  EXPECT_EQ(a.stderr_, c.stderr_);
  EXPECT_NEAR(a.mean(1), 0.0, 4 * a.stderr_(1));
  EXPECT_NEAR(a.stderr_(1), 1.0 / std::sqrt(100003.0), 1e-4);
}

TEST(SampleMean, StderrHalvesWhenSamplesQuadruple) {
  auto fn = [](long long i, Vec& out) {
    CounterRng r(6, 1, static_cast<std::uint64_t>(i));
    out(0) = r.uniform() < 0.3 ? 1.0 : 0.0;
  };
  const double s1 = sample_mean(40000, 1, fn).stderr_(0);
  const double s4 = sample_mean(160000, 1, fn).stderr_(0);
  EXPECT_NEAR(s1 / s4, 2.0, 0.4);
}

TEST(PairSphereSampling, PointsLieOnTheSphere) {
  PairSphere S;
  S.proper = true;
  S.unit_normal = Eigen::Vector3d(1, 2, 2) / 3.0;
  S.radius = 0.6;
  S.center = -0.8 * S.unit_normal;
  for (int k = 0; k < 1000; ++k) {
    CounterRng r(1, 5, static_cast<std::uint64_t>(k));
    const Vec p = sample_on_pair_sphere(S, r);
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    EXPECT_NEAR((p - S.center).norm(), 0.6, 1e-12);
    EXPECT_NEAR(p.dot(S.unit_normal), -0.8, 1e-12);
  }
}
