#include "bubblelab/fixtures.hpp"

#include "bubblelab/sampling.hpp"
#include "bubblelab/standard.hpp"

#include <cmath>
#include <numbers>

namespace bubblelab::fixtures {

ClusterParams hemispheres(int n) {
  Mat C = Mat::Zero(2, n + 1);
  C(0, 0) = 0.5;
  C(1, 0) = -0.5;
  return make_cluster(n, C, Vec::Zero(2), "hemispheres");
}

ClusterParams cap(double k12) {
  ClusterParams P = standard_of_curvature(2, 2, Vec{{0.5 * k12, -0.5 * k12}});
  P.label = "cap";
  return P;
}

namespace {

// Point at distances a from x and b from y, on the given side of the line xy.
Eigen::Vector2d apex(const Eigen::Vector2d& x, const Eigen::Vector2d& y, double a, double b, double side) {
  const double d = (y - x).norm();
  const double s = (a * a - b * b + d * d) / (2.0 * d);
  const double hgt = std::sqrt(std::max(a * a - s * s, 0.0));
  const Eigen::Vector2d u = (y - x) / d;
  const Eigen::Vector2d perp(-u.y(), u.x());
  return x + s * u + side * hgt * perp;
}

}  // namespace

ClusterParams kite(const Vec& kappa) {
  if (kappa.size() != 4) throw DomainError("kite needs four curvatures");
  auto len = [&](int i, int j) { return std::sqrt(1.0 + std::pow(kappa(i) - kappa(j), 2)); };
  const Eigen::Vector2d c1(0.0, 0.0), c2(len(1, 2), 0.0);
  const Eigen::Vector2d c0 = apex(c1, c2, len(0, 1), len(0, 2), -1.0);
  const Eigen::Vector2d c3 = apex(c1, c2, len(1, 3), len(2, 3), 1.0);
  Mat C = Mat::Zero(4, 3);
  C.row(0).head<2>() = c0.transpose();
  C.row(1).head<2>() = c1.transpose();
  C.row(2).head<2>() = c2.transpose();
  C.row(3).head<2>() = c3.transpose();
  return make_cluster(2, C, kappa.array() - kappa.mean(), "kite");
}

ClusterParams kite() { return kite(Vec{{0.3, 0.1, -0.2, -0.2}}); }

ClusterParams four_lunes() {
  Mat C = Mat::Zero(4, 3);
  for (int i = 0; i < 4; ++i) {
    const double th = i * std::numbers::pi / 2.0;
    C(i, 0) = -std::cos(th) / std::numbers::sqrt2;
    C(i, 1) = -std::sin(th) / std::numbers::sqrt2;
  }
  return make_cluster(2, C, Vec::Zero(4), "four lunes");
}

ClusterParams cushion() {
  Mat C(3, 3);
  C << -1, 1, 0,
        1, 1, 0,
        0, 0, 0;
  return make_cluster(2, C, Vec{{1.0, 1.0, 0.0}}, "cushion");
}

ClusterParams five_cluster(double y) {
  const double r3 = std::sqrt(3.0) / 2.0;
  Mat C(5, 3);
  C << 0, 0, 0,
       1, 1, 0,
      -1, 1, 0,
       0.5, y, r3,
      -0.5, y, r3;
  return make_cluster(2, C, Vec{{0.0, 1.0, 1.0, y, y}}, "five-cluster");
}

std::vector<std::pair<int, int>> five_cluster_pairs() {
  return {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 3}, {2, 4}, {3, 4}};
}

Vec random_kappa(int q, std::uint64_t seed, double scale) {
  CounterRng rng(seed, stream_id(41, q), 0);
  Vec k(q);
  for (int i = 0; i < q; ++i) k(i) = scale * (2.0 * rng.uniform() - 1.0);
  return k.array() - k.mean();
}

ClusterParams random_standard_s2(std::uint64_t seed, double kappa_scale) {
  const int q = 2 + static_cast<int>(seed % 3);
  ClusterParams P = standard_of_curvature(2, q, random_kappa(q, seed, kappa_scale));
  P = rotate(P, random_orthogonal(3, seed));
  P.label = "random standard(q=" + std::to_string(q) + ",seed=" + std::to_string(seed) + ")";
  return P;
}

ClusterParams lift(const ClusterParams& P, int extra) {
  Mat C = Mat::Zero(P.q, P.dim() + extra);
  C.leftCols(P.dim()) = P.centers;
  return make_cluster(P.n + extra, C, P.kappa, P.label);
}

}  // namespace bubblelab::fixtures
