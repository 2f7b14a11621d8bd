#include "bubblelab/measure.hpp"

#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bubblelab {

namespace {

using V2 = Eigen::Vector2d;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Plane {
  std::vector<V2> c;  // projected quasi-centers
  Vec kappa;
};

Plane project(const ClusterParams& P) {
  Eigen::JacobiSVD<Mat> svd(P.centers, Eigen::ComputeFullV);
  const Mat V = svd.matrixV();
  Plane pl;
  pl.kappa = P.kappa;
  for (int i = 0; i < P.q; ++i) {
    const Vec ci = P.c(i);
    pl.c.emplace_back(ci.dot(V.col(0)), ci.dot(V.col(1)));
  }
  return pl;
}

// 1 - (1 - rho^2)^{beta+1}, accurate near rho = 0
double one_minus_pow(double rho2, double beta) {
  if (rho2 >= 1.0) return 1.0;
  return -std::expm1((beta + 1.0) * std::log1p(-rho2));
}

// Clips s in [lo, hi] to { s : <a, x0 + s d> + b <= 0 }; returns false if empty.
bool clip(const V2& a, double b, const V2& x0, const V2& d, double& lo, double& hi) {
  const double al = a.dot(d);
  const double be = a.dot(x0) + b;
  if (std::abs(al) < 1e-15) return be <= 0.0;
  const double s = -be / al;
  if (al > 0)
    hi = std::min(hi, s);
  else
    lo = std::max(lo, s);
  return hi > lo;
}

}  // namespace

bool projected_applicable(const ClusterParams& P) {
  return P.n >= 2 && numerical_rank(P.centers, 1e-10) <= 2;
}

MeasureReport measure_projected(const ClusterParams& P) {
  if (!projected_applicable(P))
    throw DomainError("projected quadrature needs quasi-centers spanning at most a 2-plane");
  const Plane pl = project(P);
  const int q = P.q;
  const double beta = 0.5 * (P.n - 3);

  MeasureReport r;
  r.backend = "projected";
  r.volumes = Vec::Zero(q);
  r.volume_stderr = Vec::Zero(q);
  r.areas = Mat::Zero(q, q);
  r.area_stderr = Mat::Zero(q, q);

  auto diff_c = [&](int i, int k) { return V2(pl.c[i] - pl.c[k]); };
  auto diff_k = [&](int i, int k) { return pl.kappa(i) - pl.kappa(k); };

  for (int i = 0; i < q; ++i) {
    bool empty = false;
    for (int k = 0; k < q; ++k)
      if (k != i && diff_c(i, k).norm() < 1e-14 && diff_k(i, k) > 0) empty = true;
    if (empty) continue;

    double total = 0.0;
    for (int k = 0; k < q; ++k) {
      if (k == i) continue;
      const V2 a = diff_c(i, k);
      const double an = a.norm();
      if (an < 1e-14) continue;
      const double b = diff_k(i, k);
      const V2 ah = a / an;
      const V2 x0 = -b * a / (an * an);
      const V2 d(-ah.y(), ah.x());
      const double rr2 = 1.0 - x0.squaredNorm();
      if (rr2 <= 0.0) continue;
      const double rr = std::sqrt(rr2);
      double lo = -rr, hi = rr;
      bool ok = true;
      for (int m = 0; m < q && ok; ++m) {
        if (m == i || m == k) continue;
        ok = clip(diff_c(i, m), diff_k(i, m), x0, d, lo, hi);
      }
      if (!ok || hi <= lo) continue;
      const double cross = x0.x() * d.y() - x0.y() * d.x();
      if (std::abs(cross) < 1e-300) continue;
      const double p0 = std::asin(std::clamp(lo / rr, -1.0, 1.0));
      const double p1 = std::asin(std::clamp(hi / rr, -1.0, 1.0));
      const double x02 = x0.squaredNorm();
      auto f = [&](double psi) {
        const double s = rr * std::sin(psi);
        const double rho2 = x02 + s * s;
        return 0.5 * one_minus_pow(rho2, beta) / rho2 * rr * std::cos(psi);
      };
      total += cross * detail::integrate(f, p0, p1, 4);
    }

    // arcs of the unit circle inside the cell
    std::vector<double> brk;
    for (int k = 0; k < q; ++k) {
      if (k == i) continue;
      const V2 a = diff_c(i, k);
      const double an = a.norm();
      if (an < 1e-14) continue;
      const double x = -diff_k(i, k) / an;
      if (std::abs(x) > 1.0) continue;
      const double ph = std::atan2(a.y(), a.x());
      const double dd = std::acos(x);
      for (double s : {ph + dd, ph - dd}) {
        double v = std::fmod(s, kTwoPi);
        if (v < 0) v += kTwoPi;
        brk.push_back(v);
      }
    }
    std::sort(brk.begin(), brk.end());
    auto inside = [&](double th) {
      const V2 x(std::cos(th), std::sin(th));
      for (int k = 0; k < q; ++k)
        if (k != i && diff_c(i, k).dot(x) + diff_k(i, k) > 0.0) return false;
      return true;
    };
    double arc = 0.0;
    if (brk.empty()) {
      if (inside(0.0)) arc = kTwoPi;
    } else {
      for (std::size_t s = 0; s < brk.size(); ++s) {
        const double lo = brk[s];
        const double hi = (s + 1 < brk.size()) ? brk[s + 1] : brk[0] + kTwoPi;
        if (hi - lo > 0 && inside(0.5 * (lo + hi))) arc += hi - lo;
      }
    }
    total += 0.5 * arc;
    r.volumes(i) = total / std::numbers::pi;
  }

  const double norm = sphere_area(P.n - 2) / sphere_area(P.n);
  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < q; ++j) {
      const V2 a = diff_c(i, j);
      const double an = a.norm();
      if (an < 1e-14) continue;
      const V2 ah = a / an;
      const V2 x0 = -diff_k(i, j) * a / (an * an);
      const V2 d(-ah.y(), ah.x());
      const double rr2 = 1.0 - x0.squaredNorm();
      if (rr2 <= 0.0) continue;
      const double rr = std::sqrt(rr2);
      double lo = -rr, hi = rr;
      bool ok = true;
      for (int m = 0; m < q && ok; ++m) {
        if (m == i || m == j) continue;
        ok = clip(diff_c(i, m), diff_k(i, m), x0, d, lo, hi);
      }
      if (!ok || hi <= lo) continue;
      const double p0 = std::asin(std::clamp(lo / rr, -1.0, 1.0));
      const double p1 = std::asin(std::clamp(hi / rr, -1.0, 1.0));
      const int e = P.n - 2;
      const double integral =
          (e == 0) ? (p1 - p0)
                   : detail::integrate([&](double psi) { return std::pow(std::cos(psi), e); },
                                       p0, p1, 4);
      const double area = norm * std::pow(rr, P.n - 1) * integral;
      r.areas(i, j) = r.areas(j, i) = area;
      r.total_perimeter += area;
    }
  }
  return r;
}

}  // namespace bubblelab
