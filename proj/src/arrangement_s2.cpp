#include "bubblelab/measure.hpp"

#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bubblelab {

namespace {

using V3 = Eigen::Vector3d;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

V3 perpendicular_unit(const V3& a) {
  V3 e = V3::Zero();
  int k = 0;
  a.cwiseAbs().minCoeff(&k);
  e(k) = 1.0;
  V3 u = e - e.dot(a) * a;
  return u.normalized();
}

double margin3(const ClusterParams& P, int i, int j, const V3& p) {
  return pair_margin(P, i, j, Vec(p));
}

struct Oriented {
  int arc;
  bool forward;
  V3 start, end, t_start, t_end;
  double kg;  // integral of geodesic curvature w.r.t. the region on the left
};

Oriented orient(const std::vector<CircleArc>& arcs, int a, bool forward) {
  const CircleArc& A = arcs[a];
  Oriented o;
  o.arc = a;
  o.forward = forward;
  const double dphi = A.phi1 - A.phi0;
  if (forward) {
    o.start = A.point(A.phi0);
    o.end = A.point(A.phi1);
    o.t_start = A.tangent(A.phi0);
    o.t_end = A.tangent(A.phi1);
    o.kg = A.cos_rho * dphi;
  } else {
    o.start = A.point(A.phi1);
    o.end = A.point(A.phi0);
    o.t_start = -A.tangent(A.phi1);
    o.t_end = -A.tangent(A.phi0);
    o.kg = -A.cos_rho * dphi;
  }
  return o;
}

double turning(const V3& p, const V3& tin, const V3& tout) {
  return std::atan2(p.dot(tin.cross(tout)), tin.dot(tout));
}

}  // namespace

V3 CircleArc::point(double phi) const {
  return cos_rho * axis + sin_rho * (std::cos(phi) * u + std::sin(phi) * w);
}

V3 CircleArc::tangent(double phi) const { return -std::sin(phi) * u + std::cos(phi) * w; }

S2Arrangement build_arrangement_s2(const ClusterParams& P) {
  if (P.n != 2) throw DomainError("the exact arrangement is only available on S^2");
  S2Arrangement out;
  const int q = P.q;

  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < q; ++j) {
      const V3 c = P.cij(i, j);
      const double cn = c.norm();
      if (cn < 1e-14) continue;
      const double cr = P.kij(i, j) / cn;
      if (std::abs(cr) >= 1.0 - 1e-14) continue;
      CircleArc base;
      base.i = i;
      base.j = j;
      base.axis = -c / cn;
      base.cos_rho = cr;
      base.sin_rho = std::sqrt(1.0 - cr * cr);
      base.u = perpendicular_unit(base.axis);
      base.w = base.axis.cross(base.u);

      std::vector<double> brk;
      for (int k = 0; k < q; ++k) {
        if (k == i || k == j) continue;
        const V3 cik = P.cij(i, k);
        const double A = base.sin_rho * cik.dot(base.u);
        const double B = base.sin_rho * cik.dot(base.w);
        const double C0 = base.cos_rho * cik.dot(base.axis) + P.kij(i, k);
        const double R = std::hypot(A, B);
        if (R < 1e-15) continue;
        double x = -C0 / R;
        if (x > 1.0 + 1e-12 || x < -1.0 - 1e-12) continue;
        x = std::clamp(x, -1.0, 1.0);
        const double ph = std::atan2(B, A);
        const double dd = std::acos(x);
        for (double s : {ph + dd, ph - dd}) {
          double v = std::fmod(s, kTwoPi);
          if (v < 0) v += kTwoPi;
          brk.push_back(v);
        }
      }
      // breakpoints at tangencies and multiple junctions are only known to
      // about sqrt(eps); clusters closer than kMerge become one breakpoint
      constexpr double kMerge = 1e-7;
      std::sort(brk.begin(), brk.end());
      std::vector<double> b;
      std::vector<int> cnt;
      for (std::size_t s = 0; s < brk.size(); ++s) {
        const double v = brk[s];
        if (s > 0 && v - brk[s - 1] <= kMerge) {
          b.back() += v;
          ++cnt.back();
        } else {
          b.push_back(v);
          cnt.push_back(1);
        }
      }
      for (std::size_t s = 0; s < b.size(); ++s) b[s] /= cnt[s];
      if (b.size() >= 2 && b.front() + kTwoPi - b.back() <= kMerge) b.pop_back();

      if (b.empty()) {
        if (q == 2 || margin3(P, i, j, base.point(0.0)) > 1e-12) {
          CircleArc a = base;
          a.phi0 = 0.0;
          a.phi1 = kTwoPi;
          a.full_circle = true;
          out.arcs.push_back(a);
        }
        continue;
      }

      const int m = static_cast<int>(b.size());
      std::vector<char> inside(m);
      for (int s = 0; s < m; ++s) {
        const double lo = b[s];
        const double hi = (s + 1 < m) ? b[s + 1] : b[0] + kTwoPi;
        inside[s] = margin3(P, i, j, base.point(0.5 * (lo + hi))) > 1e-12;
      }
      if (std::all_of(inside.begin(), inside.end(), [](char x) { return x != 0; })) {
        CircleArc a = base;
        a.phi0 = 0.0;
        a.phi1 = kTwoPi;
        a.full_circle = true;
        out.arcs.push_back(a);
        continue;
      }
      if (std::none_of(inside.begin(), inside.end(), [](char x) { return x != 0; })) continue;
      // start from an interval that follows an excluded one
      int s0 = 0;
      while (inside[(s0 + m - 1) % m] || !inside[s0]) ++s0;
      for (int step = 0; step < m;) {
        const int s = (s0 + step) % m;
        if (!inside[s]) {
          ++step;
          continue;
        }
        int e = step;
        while (e + 1 < m && inside[(s0 + e + 1) % m]) ++e;
        const int last = (s0 + e) % m;
        double lo = b[s];
        double hi = (last + 1 < m) ? b[last + 1] : b[0] + kTwoPi;
        while (hi <= lo) hi += kTwoPi;
        CircleArc a = base;
        a.phi0 = lo;
        a.phi1 = hi;
        if (a.length() > 1e-10) out.arcs.push_back(a);
        step = e + 1;
      }
    }
  }

  // vertices from arc endpoints
  for (int a = 0; a < static_cast<int>(out.arcs.size()); ++a) {
    const CircleArc& A = out.arcs[a];
    if (A.full_circle) continue;
    for (int end = 0; end < 2; ++end) {
      const V3 p = A.point(end == 0 ? A.phi0 : A.phi1);
      int found = -1;
      for (int v = 0; v < static_cast<int>(out.vertices.size()); ++v)
        if ((out.vertices[v].p - p).norm() < 1e-7) found = v;
      if (found < 0) {
        ArcVertex vx;
        vx.p = p.normalized();
        vx.cells = classify_point(P, Vec(vx.p), 1e-7);
        out.vertices.push_back(vx);
        found = static_cast<int>(out.vertices.size()) - 1;
      }
      out.vertices[found].arc_ends.emplace_back(a, end);
    }
  }

  // cell areas by Gauss-Bonnet over boundary loops
  out.cell_areas = Vec::Zero(q);
  for (int cell = 0; cell < q; ++cell) {
    std::vector<Oriented> arcs;
    for (int a = 0; a < static_cast<int>(out.arcs.size()); ++a) {
      if (out.arcs[a].i == cell) arcs.push_back(orient(out.arcs, a, true));
      if (out.arcs[a].j == cell) arcs.push_back(orient(out.arcs, a, false));
    }
    if (arcs.empty()) {
      bool any = false;
      for (const V3& probe : {V3(1, 0, 0), V3(0, 1, 0), V3(0, 0, 1)})
        if (argmin_cell(P, Vec(probe)) == cell) any = true;
      out.cell_areas(cell) = any ? 4.0 * std::numbers::pi : 0.0;
      continue;
    }
    std::vector<char> used(arcs.size(), 0);
    double total = 0.0;
    for (std::size_t s = 0; s < arcs.size(); ++s) {
      if (used[s]) continue;
      used[s] = 1;
      if (out.arcs[arcs[s].arc].full_circle) {
        total += kTwoPi - arcs[s].kg;
        continue;
      }
      double turn = 0.0, kg = arcs[s].kg;
      std::size_t cur = s;
      for (;;) {
        const V3& p = arcs[cur].end;
        int next = -1;
        double best_turn = -10.0;
        bool closes = false;
        for (std::size_t k = 0; k < arcs.size(); ++k) {
          if (out.arcs[arcs[k].arc].full_circle) continue;
          if ((arcs[k].start - p).norm() > 1e-6) continue;
          if (used[k] && k != s) continue;
          const double tr = turning(p, arcs[cur].t_end, arcs[k].t_start);
          if (tr > best_turn) {
            best_turn = tr;
            next = static_cast<int>(k);
            closes = (k == s);
          }
        }
        if (next < 0) {
          std::ostringstream os;
          os << "boundary loop of cell " << cell << " does not close";
          throw ArrangementError(os.str(), cell);
        }
        if (std::abs(std::abs(best_turn) - std::numbers::pi) < 1e-6) {
          // reversal: interior angle 0 (cusp) or 2 pi, decided by the cell on the left
          const V3 left = p.cross(arcs[next].t_start);
          const V3 probe = (p + 1e-5 * left).normalized();
          best_turn = argmin_cell(P, Vec(probe)) == cell ? -std::numbers::pi : std::numbers::pi;
        }
        turn += best_turn;
        if (closes) break;
        used[next] = 1;
        kg += arcs[next].kg;
        cur = static_cast<std::size_t>(next);
      }
      total += kTwoPi - turn - kg;
    }
    double area = std::fmod(total, 4.0 * std::numbers::pi);
    if (area < 0) area += 4.0 * std::numbers::pi;
    out.cell_areas(cell) = area;
  }
  const double sum = out.cell_areas.sum();
  if (std::abs(sum - 4.0 * std::numbers::pi) > 1e-6) {
    std::ostringstream os;
    os << "cell areas sum to " << sum << " instead of 4 pi (" << out.cell_areas.transpose() << ")";
    throw ArrangementError(os.str(), -1);
  }
  return out;
}

double arc_integral(const CircleArc& a, const std::function<double(const Eigen::Vector3d&)>& w) {
  const double dphi = a.phi1 - a.phi0;
  const int panels = std::max(2, static_cast<int>(std::ceil(dphi / (std::numbers::pi / 16))));
  return a.sin_rho *
         detail::integrate([&](double phi) { return w(a.point(phi)); }, a.phi0, a.phi1, panels);
}

Eigen::Vector3d arc_integral_vec(const CircleArc& a,
                                 const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& w) {
  Eigen::Vector3d r;
  for (int k = 0; k < 3; ++k) r(k) = arc_integral(a, [&](const V3& p) { return w(p)(k); });
  return r;
}

MeasureReport measure_exact_s2(const ClusterParams& P) {
  const S2Arrangement arr = build_arrangement_s2(P);
  const double tot = 4.0 * std::numbers::pi;
  MeasureReport r;
  r.backend = "exact_s2";
  r.volumes = arr.cell_areas / tot;
  r.volume_stderr = Vec::Zero(P.q);
  r.areas = Mat::Zero(P.q, P.q);
  r.area_stderr = Mat::Zero(P.q, P.q);
  for (const CircleArc& a : arr.arcs) {
    r.areas(a.i, a.j) += a.length() / tot;
    r.areas(a.j, a.i) = r.areas(a.i, a.j);
  }
  for (int i = 0; i < P.q; ++i)
    for (int j = i + 1; j < P.q; ++j) r.total_perimeter += r.areas(i, j);
  return r;
}

}  // namespace bubblelab
