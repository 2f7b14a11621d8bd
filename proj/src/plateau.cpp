#include "bubblelab/plateau.hpp"

#include "bubblelab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bubblelab {

BlowUpCone blowup_at(const ClusterParams& P, const Vec& p, double tie_tol) {
  BlowUpCone cone;
  cone.p = p;
  cone.incidence = classify_point(P, p, tie_tol);
  const int k = static_cast<int>(cone.incidence.size());
  cone.normals = Mat(k, P.dim());
  for (int r = 0; r < k; ++r) {
    const Vec c = P.c(cone.incidence[r]);
    cone.normals.row(r) = (c - c.dot(p) * p).transpose();
  }
  const Eigen::RowVectorXd mean = cone.normals.colwise().mean();
  cone.normals.rowwise() -= mean;
  cone.affine_rank = numerical_rank(cone.normals, 1e-7);
  return cone;
}

PlateauCheck plateau_at(const BlowUpCone& cone, double tol) {
  PlateauCheck chk;
  const int k = static_cast<int>(cone.incidence.size());
  if (k < 2) return chk;
  chk.rank_test = cone.affine_rank == k - 1;
  const Mat B = simplex_basis(k);
  const Mat G = B.transpose() * cone.normals * cone.normals.transpose() * B;
  chk.gram_residual = (G - 0.5 * Mat::Identity(k - 1, k - 1)).cwiseAbs().maxCoeff();
  chk.gram_test = chk.gram_residual <= tol;
  chk.plateau = chk.rank_test && chk.gram_test;
  return chk;
}

std::optional<Vec> project_to_stratum(const ClusterParams& P, const std::vector<int>& S, Vec p,
                                      int max_iter) {
  const int m = static_cast<int>(S.size()) - 1;
  const int d = P.dim();
  Mat J(m + 1, d);
  Vec F(m + 1);
  for (int it = 0; it < max_iter; ++it) {
    for (int r = 0; r < m; ++r) {
      const Vec c = P.cij(S[0], S[r + 1]);
      J.row(r) = c.transpose();
      F(r) = c.dot(p) + P.kij(S[0], S[r + 1]);
    }
    J.row(m) = p.transpose();
    F(m) = 0.5 * (p.squaredNorm() - 1.0);
    if (F.cwiseAbs().maxCoeff() < 1e-14) break;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
    cod.setThreshold(1e-12);
    p -= cod.solve(F);
    if (!p.allFinite() || p.norm() < 1e-8) return std::nullopt;
  }
  if (F.cwiseAbs().maxCoeff() > 1e-11) return std::nullopt;
  return Vec(p.normalized());
}

namespace {

void subsets(int q, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < q; ++i) {
    cur.push_back(i);
    subsets(q, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

PlateauReport certify_plateau(const ClusterParams& P, const InterfaceGraph& graph, int budget,
                              std::uint64_t seed) {
  PlateauReport rep;
  rep.arank_C = numerical_rank(P.centers, 1e-7);
  const int d = P.dim();
  const double tie = 1e-7;

  std::vector<std::vector<int>> all;
  for (int k = 3; k <= std::min(P.q, P.n + 2); ++k) {
    std::vector<int> cur;
    subsets(P.q, k, 0, cur, all);
  }
  for (std::size_t s = 0; s < all.size(); ++s) {
    const auto& S = all[s];
    for (int b = 0; b < budget; ++b) {
      CounterRng rng(seed, stream_id(31, static_cast<int>(s)), static_cast<std::uint64_t>(b));
      const auto p = project_to_stratum(P, S, rng.unit_vec(d));
      if (!p) continue;
      const auto I = classify_point(P, *p, tie);
      if (!std::includes(I.begin(), I.end(), S.begin(), S.end())) continue;
      const bool dup = std::any_of(rep.points.begin(), rep.points.end(),
                                   [&](const PlateauPoint& x) { return (x.p - *p).norm() < 1e-6; });
      if (dup) continue;
      const BlowUpCone cone = blowup_at(P, *p, tie);
      const PlateauCheck chk = plateau_at(cone);
      PlateauPoint pt{*p, cone.incidence, cone.affine_rank, chk.plateau, chk.gram_residual};
      rep.points.push_back(pt);
      if (!chk.plateau) rep.worst.push_back(pt);
    }
  }
  rep.found_multi = !rep.points.empty();

  for (auto [i, j] : graph.pairs()) {
    const PairSphere S = pair_sphere(P, i, j);
    if (!S.proper) continue;
    for (int b = 0; b < 4 * budget; ++b) {
      CounterRng rng(seed, stream_id(37, i, j), static_cast<std::uint64_t>(b));
      const Vec p = sample_on_pair_sphere(S, rng);
      if (P.q > 2 && pair_margin(P, i, j, p) <= 1e-7) continue;
      const BlowUpCone cone = blowup_at(P, p, 1e-9);
      if (cone.incidence.size() != 2) continue;
      ++rep.interface_points;
      rep.max_interface_normal_error = std::max(
          rep.max_interface_normal_error, std::abs(cone.normals.row(0).norm() * 2.0 - 1.0));
    }
  }

  if (rep.worst.empty()) {
    rep.plateau_up_to = P.n;
    rep.fully_plateau = true;
    if (!rep.found_multi) rep.note = "no multi-point found; certification is vacuous";
  } else {
    int lo = P.n;
    for (const auto& w : rep.worst) lo = std::min(lo, w.affine_rank - 1);
    rep.plateau_up_to = lo;
    rep.fully_plateau = false;
  }
  return rep;
}

std::vector<TriplePointCheck> triple_point_checks(const ClusterParams& P, const PlateauReport& rep) {
  std::vector<TriplePointCheck> out;
  for (const PlateauPoint& pt : rep.points) {
    if (pt.incidence.size() != 3 || !pt.plateau) continue;
    TriplePointCheck c;
    c.p = pt.p;
    c.u = pt.incidence[0];
    c.v = pt.incidence[1];
    c.w = pt.incidence[2];
    auto normal = [&](int a, int b) { return Vec(P.cij(a, b) + P.kij(a, b) * pt.p); };
    const Vec n1 = normal(c.u, c.v), n2 = normal(c.v, c.w), n3 = normal(c.w, c.u);
    c.normal_sum = (n1 + n2 + n3).norm();
    auto angle = [](const Vec& a, const Vec& b) {
      const double s = (a.squaredNorm() * b.squaredNorm() - std::pow(a.dot(b), 2));
      return std::atan2(std::sqrt(std::max(s, 0.0)), a.dot(b)) * 180.0 / std::numbers::pi;
    };
    for (double ang : {angle(n1, n2), angle(n2, n3), angle(n3, n1)})
      c.max_angle_error_deg = std::max(c.max_angle_error_deg, std::abs(ang - 120.0));
    out.push_back(c);
  }
  return out;
}

std::string q3_name(Q3Class c) {
  switch (c) {
    case Q3Class::plateau: return "Plateau";
    case Q3Class::pcf: return "PCF";
    case Q3Class::both: return "both";
    default: return "neither";
  }
}

Q3Report classify_q3(const ClusterParams& P, const PlateauReport& plateau,
                     const std::optional<PcfFit>& pcf) {
  Q3Report r;
  r.q3_plateau = plateau.plateau_up_to >= P.q - 3;
  const bool full = plateau.fully_plateau;
  const bool is_pcf = pcf.has_value();
  r.cls = full && is_pcf ? Q3Class::both
          : full         ? Q3Class::plateau
          : is_pcf       ? Q3Class::pcf
                         : Q3Class::neither;
  if (r.q3_plateau && r.cls == Q3Class::neither) {
    r.contradiction = true;
    r.note = "certified (q-3)-Plateau but neither Plateau nor PCF: investigate tolerances";
  }
  return r;
}

}  // namespace bubblelab
