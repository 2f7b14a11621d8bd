#include "bubblelab/deform.hpp"

#include "bubblelab/plateau.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bubblelab {

namespace {

Mat sym_sqrt_floor(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
  Vec ev = es.eigenvalues();
  // eigenvalues at the rounding level of A are zeros; their square roots would not be
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(ev.cwiseAbs().maxCoeff(), 1.0);
  for (int k = 0; k < ev.size(); ++k) {
    if (ev(k) < -1e-12) throw DomainError("Gram matrix has a negative eigenvalue");
    ev(k) = ev(k) <= noise ? 0.0 : std::sqrt(ev(k));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

ClusterParams conformal_step(const ClusterParams& P, const Vec& N, double t) {
  if (N.size() != P.dim() || std::abs(N.norm() - 1.0) > 1e-12)
    throw DomainError("conformal_step needs a unit pole");
  if ((P.centers * N).cwiseAbs().maxCoeff() > 1e-9)
    throw DomainError("N is not a pole: some quasi-center is not orthogonal to it");
  Mat C = P.centers;
  const double ch = std::cosh(t), sh = std::sinh(t);
  for (int i = 0; i < P.q; ++i) C.row(i) -= P.kappa(i) * sh * N.transpose();
  return make_cluster(P.n, C, P.kappa * ch, P.label);
}

PcfFit pcf_fit(const ClusterParams& P) {
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(P.centers);
  cod.setThreshold(1e-10);
  PcfFit f;
  f.xi = cod.solve(Vec(-P.kappa));
  f.residual = (P.centers * f.xi + P.kappa).cwiseAbs().maxCoeff();
  f.conformally_flat = f.xi.norm() < 1.0;
  return f;
}

std::optional<PcfFit> pcf_detect(const ClusterParams& P, double tol) {
  PcfFit f = pcf_fit(P);
  if (f.residual > tol) return std::nullopt;
  return f;
}

double lse_residual(const ClusterParams& P, const InterfaceGraph& graph, const Mat& dC, const Vec& a) {
  double r = 0.0;
  for (auto [i, j] : graph.pairs()) {
    const Vec dcij = (dC.row(i) - dC.row(j)).transpose();
    r = std::max(r, std::abs(P.cij(i, j).dot(dcij) - P.kij(i, j) * (a(i) - a(j))));
  }
  return r;
}

LseSolution lse_solve(const ClusterParams& P, const InterfaceGraph& graph, const Vec& a) {
  if (a.size() != P.q) throw DomainError("a must have length q");
  const int d = P.dim();
  const auto pairs = graph.pairs();
  const int m = static_cast<int>(pairs.size());
  Mat A = Mat::Zero(m + d, P.q * d);
  Vec b = Vec::Zero(m + d);
  for (int r = 0; r < m; ++r) {
    auto [i, j] = pairs[r];
    const Vec c = P.cij(i, j);
    A.block(r, i * d, 1, d) = c.transpose();
    A.block(r, j * d, 1, d) = -c.transpose();
    b(r) = P.kij(i, j) * (a(i) - a(j));
  }
  for (int i = 0; i < P.q; ++i) A.block(m, i * d, d, d) = Mat::Identity(d, d);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  cod.setThreshold(1e-12);
  const Vec x = cod.solve(b);
  LseSolution s;
  s.delta_centers = Mat(P.q, d);
  for (int i = 0; i < P.q; ++i) s.delta_centers.row(i) = x.segment(i * d, d).transpose();
  s.delta_kappa = a;
  s.residual = lse_residual(P, graph, s.delta_centers, a);
  if (auto pcf = pcf_detect(P)) {
    Mat dC(P.q, d);
    for (int i = 0; i < P.q; ++i) dC.row(i) = -a(i) * pcf->xi.transpose();
    s.closed_form_checked = true;
    s.closed_form_residual = lse_residual(P, graph, dC, a);
  }
  return s;
}

GramFactor gram_factor(const ClusterParams& P) {
  if (P.q - 1 > P.dim()) throw DomainError("Gram path needs q - 1 <= n + 1");
  GramFactor f;
  f.B = simplex_basis(P.q);
  const Mat X = f.B.transpose() * P.centers;
  f.G = X * X.transpose();
  const Vec kb = f.B.transpose() * P.kappa;
  f.target = 0.5 * Mat::Identity(P.q - 1, P.q - 1) + kb * kb.transpose();
  // polar factor of X; singular directions get the completion chosen by the SVD
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f.U = svd.matrixU() * svd.matrixV().leftCols(P.q - 1).transpose();
  return f;
}

Mat gram_matrix_at(const GramFactor& f, double t) { return (1.0 - t) * f.G + t * f.target; }

ClusterParams gram_path(const ClusterParams& P, const GramFactor& f, double t) {
  if (t < 0.0 || t > 1.0) throw DomainError("Gram path time must lie in [0, 1]");
  const Mat C = f.B * sym_sqrt_floor(gram_matrix_at(f, t)) * f.U;
  return make_cluster(P.n, C, P.kappa, P.label);
}

ClusterParams gram_path(const ClusterParams& P, double t) { return gram_path(P, gram_factor(P), t); }

namespace {

MeasureReport measure_step(const ClusterParams& P, const InterfaceGraph& g, const McConfig& mc,
                           bool force_mc) {
  if (force_mc) return measure_mc(P, g, mc);
  if (P.n == 2) return measure_exact_s2(P);
  if (projected_applicable(P)) return measure_projected(P);
  return measure_mc(P, g, mc);
}

}  // namespace

GramInvarianceReport gram_invariance_check(const ClusterParams& P, double t_max, int steps,
                                           const GramCheckConfig& cfg) {
  if (steps < 1) throw DomainError("steps must be positive");
  if (t_max < 0.0 || t_max > 1.0) throw DomainError("t_max must lie in [0, 1]");
  GramInvarianceReport rep;
  const InterfaceGraph g0 = detect_interfaces(P, cfg.detect);

  if (!perpendicular_pole(P)) {
    rep.precondition_ok = false;
    rep.precondition_failures.push_back("cluster is not perpendicular");
  }
  const PlateauReport pr = certify_plateau(P, g0, cfg.plateau_budget, cfg.plateau_seed);
  if (!pr.fully_plateau) {
    rep.precondition_ok = false;
    std::ostringstream os;
    os << "Plateau certification failed (Plateau only up to l = " << pr.plateau_up_to << ")";
    rep.precondition_failures.push_back(os.str());
  }

  const GramFactor f = gram_factor(P);
  MeasureReport m0;
  rep.min_lambda_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= steps; ++s) {
    const double t = t_max * s / steps;
    const ClusterParams Pt = gram_path(P, f, t);
    const InterfaceGraph gt = (s == 0) ? g0 : detect_interfaces(Pt, cfg.detect);
    const MeasureReport m = measure_step(Pt, gt, cfg.mc, cfg.force_mc);
    if (s == 0) {
      m0 = m;
      rep.backend = m.backend;
      for (int i = 0; i < P.q; ++i)
        if (m.volumes(i) <= 0.0) {
          rep.precondition_ok = false;
          rep.precondition_failures.push_back("cell " + std::to_string(i) + " is empty");
        }
    }
    GramStep st;
    st.t = t;
    st.volumes = m.volumes;
    st.volume_stderr = m.volume_stderr;
    st.perimeter = m.total_perimeter;
    st.perimeter_stderr = m.perimeter_stderr;
    for (int i = 0; i < P.q; ++i) {
      const double d = std::abs(m.volumes(i) - m0.volumes(i));
      st.max_volume_dev = std::max(st.max_volume_dev, d);
      const double se = std::hypot(m.volume_stderr(i), m0.volume_stderr(i));
      if (se > 0) st.volume_dev_sigma = std::max(st.volume_dev_sigma, d / se);
    }
    st.perimeter_dev = std::abs(m.total_perimeter - m0.total_perimeter);
    const double pse = std::hypot(m.perimeter_stderr, m0.perimeter_stderr);
    if (pse > 0) st.perimeter_dev_sigma = st.perimeter_dev / pse;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram_matrix_at(f, t));
    st.lambda_min = es.eigenvalues().minCoeff();
    if (t > 0) rep.min_lambda_gap = std::min(rep.min_lambda_gap, st.lambda_min - 0.5 * t);
    for (int i = 0; i < P.q; ++i)
      for (int j = i + 1; j < P.q; ++j)
        if (gt.has(i, j) && !g0.has(i, j)) st.new_pairs.emplace_back(i, j);
    st.new_interface = !st.new_pairs.empty();
    if (st.new_interface && !rep.first_new_interface) rep.first_new_interface = t;
    if (!rep.first_new_interface) {
      rep.max_volume_dev = std::max(rep.max_volume_dev, st.max_volume_dev);
      rep.max_perimeter_dev = std::max(rep.max_perimeter_dev, st.perimeter_dev);
      rep.max_dev_sigma = std::max({rep.max_dev_sigma, st.volume_dev_sigma, st.perimeter_dev_sigma});
    }
    rep.steps.push_back(std::move(st));
  }
  return rep;
}

}  // namespace bubblelab
