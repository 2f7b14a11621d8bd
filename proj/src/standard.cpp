#include "bubblelab/standard.hpp"

#include "bubblelab/measure.hpp"

#include <cmath>
#include <sstream>

namespace bubblelab {

namespace {

Mat sym_sqrt(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
  Vec ev = es.eigenvalues();
  for (int k = 0; k < ev.size(); ++k) {
    if (ev(k) < -1e-12) throw DomainError("matrix square root of an indefinite matrix");
    ev(k) = std::sqrt(std::max(ev(k), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void check_range(int n, int q) {
  if (q < 2 || q > n + 2) {
    std::ostringstream os;
    os << "standard bubbles need 2 <= q <= n+2 (got n=" << n << ", q=" << q << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

ClusterParams standard_of_curvature(int n, int q, const Vec& kappa) {
  check_range(n, q);
  if (kappa.size() != q) throw DomainError("curvature vector length must equal q");
  if (std::abs(kappa.sum()) > 1e-9) throw DomainError("curvature vector must sum to zero");
  const Mat B = simplex_basis(q);
  const Vec kb = B.transpose() * kappa;
  const Mat G = 0.5 * Mat::Identity(q - 1, q - 1) + kb * kb.transpose();
  const Mat S = sym_sqrt(G);
  Mat C = Mat::Zero(q, n + 1);
  C.leftCols(q - 1) = B * S;
  std::ostringstream label;
  label << "standard(n=" << n << ",q=" << q << ")";
  return make_cluster(n, C, B * kb, label.str());
}

ClusterParams equal_volume_standard(int n, int q) {
  ClusterParams P = standard_of_curvature(n, q, Vec::Zero(q));
  std::ostringstream label;
  label << "equal-volume standard(n=" << n << ",q=" << q << ")";
  P.label = label.str();
  return P;
}

Vec mobius_point_flow(const Vec& p, const Vec& N, double t) {
  if (std::abs(p.norm() - 1.0) > 1e-12 || std::abs(N.norm() - 1.0) > 1e-12)
    throw DomainError("mobius_point_flow needs unit vectors");
  const double z = p.dot(N);
  const double ch = std::cosh(t), sh = std::sinh(t);
  Vec out = p - z * N + (z * ch + sh) * N;
  out /= (ch + z * sh);
  return out;
}

double mobius_conformal_factor(const Vec& p, const Vec& N, double t) {
  return 1.0 / (std::cosh(t) + N.dot(p) * std::sinh(t));
}

ClusterParams apply_mobius(const ClusterParams& P, const MobiusMap& map) {
  if (const auto* f = std::get_if<MobiusFlow>(&map.kind)) {
    if (f->theta.size() != P.dim()) throw DomainError("flow direction has wrong dimension");
    if (std::abs(f->theta.norm() - 1.0) > 1e-12)
      throw DomainError("flow direction must be a unit vector; scale t instead");
    const Vec& N = f->theta;
    const double ch = std::cosh(f->t), sh = std::sinh(f->t);
    Mat C = P.centers;
    Vec k = P.kappa;
    for (int i = 0; i < P.q; ++i) {
      const Vec ci = P.c(i);
      const double a = ci.dot(N);
      C.row(i) = (ci - a * N + (a * ch - P.kappa(i) * sh) * N).transpose();
      k(i) = P.kappa(i) * ch - a * sh;
    }
    return make_cluster(P.n, C, k, P.label);
  }
  if (const auto* o = std::get_if<MobiusOrthogonal>(&map.kind)) {
    if (o->Q.rows() != P.dim() || o->Q.cols() != P.dim())
      throw DomainError("orthogonal map has wrong dimension");
    if ((o->Q.transpose() * o->Q - Mat::Identity(P.dim(), P.dim())).cwiseAbs().maxCoeff() > 1e-12)
      throw DomainError("map is not orthogonal");
    ClusterParams R = rotate(P, o->Q);
    return make_cluster(R.n, R.centers, R.kappa, P.label);
  }
  const auto& comp = std::get<MobiusComposition>(map.kind);
  ClusterParams R = P;
  for (const MobiusMap& m : comp.maps) R = apply_mobius(R, m);
  return R;
}

VolumeBackend resolve_backend(int n, int q, VolumeBackend requested) {
  if (requested != VolumeBackend::automatic) return requested;
  if (n == 2) return VolumeBackend::exact_s2;
  if (q <= 3) return VolumeBackend::projected;
  return VolumeBackend::monte_carlo;
}

std::string backend_name(VolumeBackend b) {
  switch (b) {
    case VolumeBackend::exact_s2: return "exact_s2";
    case VolumeBackend::projected: return "projected";
    case VolumeBackend::monte_carlo: return "monte_carlo";
    default: return "automatic";
  }
}

namespace {

MeasureReport measure_standard(const ClusterParams& P, VolumeBackend b, const NewtonConfig& cfg,
                               bool need_areas) {
  switch (b) {
    case VolumeBackend::exact_s2: return measure_exact_s2(P);
    case VolumeBackend::projected: return measure_projected(P);
    default: {
      McConfig mc{cfg.mc_samples, cfg.seed, 0};
      if (!need_areas) return measure_mc_volumes(P, mc);
      return measure_mc(P, InterfaceGraph::complete(P.q), mc);
    }
  }
}

}  // namespace

Vec standard_volumes(int n, int q, const Vec& kappa, const NewtonConfig& cfg) {
  const VolumeBackend b = resolve_backend(n, q, cfg.backend);
  return measure_standard(standard_of_curvature(n, q, kappa), b, cfg, false).volumes;
}

StandardSolve standard_of_volume(int n, int q, const Vec& v, const NewtonConfig& cfg) {
  check_range(n, q);
  if (v.size() != q) throw DomainError("volume vector length must equal q");
  if (std::abs(v.sum() - 1.0) > 1e-9 || v.minCoeff() <= 0.0)
    throw DomainError("volumes must lie in the open simplex");
  const VolumeBackend b = resolve_backend(n, q, cfg.backend);
  const bool mc = b == VolumeBackend::monte_carlo;
  const double tol = mc ? std::max(cfg.tol, 2.0 / static_cast<double>(cfg.mc_samples)) : cfg.tol;
  const double h = mc ? std::max(cfg.fd_step, 1e-3) : cfg.fd_step;
  NewtonConfig inner = cfg;
  inner.backend = b;

  const Mat B = simplex_basis(q);
  auto residual = [&](const Vec& y) {
    return Vec(B.transpose() * (standard_volumes(n, q, B * y, inner) - v));
  };
  Vec y = Vec::Zero(q - 1);
  Vec r = residual(y);
  Mat J;
  int age = 3;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    if (r.cwiseAbs().maxCoeff() <= tol) break;
    bool fresh = false;
    if (age >= 3) {
      J.resize(q - 1, q - 1);
      for (int k = 0; k < q - 1; ++k) {
        Vec e = Vec::Zero(q - 1);
        e(k) = h;
        J.col(k) = (residual(y + e) - residual(y - e)) / (2.0 * h);
      }
      age = 0;
      fresh = true;
    }
    const Vec step = J.fullPivLu().solve(-r);
    double lam = 1.0;
    Vec yn, rn;
    bool ok = false;
    while (lam > 1e-4) {
      yn = y + lam * step;
      rn = residual(yn);
      if (rn.norm() < r.norm()) {
        ok = true;
        break;
      }
      lam *= 0.5;
    }
    if (!ok) {
      if (!fresh) {
        age = 3;
        continue;
      }
      break;
    }
    y = yn;
    r = rn;
    ++age;
  }
  const double res = r.cwiseAbs().maxCoeff();
  if (res > tol) {
    std::ostringstream os;
    os << "Newton for prescribed volumes did not converge (residual " << res << ")";
    throw NewtonError(os.str(), B * y, res);
  }
  StandardSolve s;
  s.params = standard_of_curvature(n, q, B * y);
  s.iterations = it;
  s.residual = res;
  return s;
}

double model_profile_value(int n, int q, const Vec& v, const NewtonConfig& cfg, Vec* kappa_out) {
  const StandardSolve s = standard_of_volume(n, q, v, cfg);
  if (kappa_out) *kappa_out = s.params.kappa;
  const VolumeBackend b = resolve_backend(n, q, cfg.backend);
  return measure_standard(s.params, b, cfg, true).total_perimeter;
}

ModelProfilePoint model_profile(int n, int q, const Vec& v, const ProfileConfig& cfg) {
  const VolumeBackend b = resolve_backend(n, q, cfg.newton.backend);
  ModelProfilePoint pt;
  pt.v = v;
  pt.backend = backend_name(b);
  pt.fd_grad = cfg.fd_grad;
  pt.fd_hess = cfg.fd_hess > 0 ? cfg.fd_hess : (b == VolumeBackend::monte_carlo ? 2e-2 : 2e-3);
  pt.basis = simplex_basis(q);
  const Mat& B = pt.basis;
  auto I = [&](const Vec& w) { return model_profile_value(n, q, w, cfg.newton); };
  pt.I_m = model_profile_value(n, q, v, cfg.newton, &pt.kappa);

  const int m = q - 1;
  Vec g(m);
  for (int a = 0; a < m; ++a) {
    const Vec e = B.col(a);
    g(a) = (I(v + pt.fd_grad * e) - I(v - pt.fd_grad * e)) / (2.0 * pt.fd_grad);
  }
  const double hh = pt.fd_hess;
  Mat H(m, m);
  for (int a = 0; a < m; ++a) {
    const Vec ea = B.col(a);
    H(a, a) = (I(v + hh * ea) - 2.0 * pt.I_m + I(v - hh * ea)) / (hh * hh);
    for (int c = a + 1; c < m; ++c) {
      const Vec ec = B.col(c);
      H(a, c) = (I(v + hh * (ea + ec)) - I(v + hh * (ea - ec)) - I(v - hh * (ea - ec)) +
                 I(v - hh * (ea + ec))) /
                (4.0 * hh * hh);
      H(c, a) = H(a, c);
    }
  }
  pt.grad = B * g;
  pt.hessian = B * H * B.transpose();
  return pt;
}

double pde_residual(const ModelProfilePoint& pt, int n) {
  if (n < 2) throw DomainError("the profile equation needs n >= 2");
  const Mat& B = pt.basis;
  const Mat H = B.transpose() * pt.hessian * B;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
  if (es.eigenvalues().maxCoeff() >= 0.0)
    throw HessianError("finite-difference Hessian is not negative definite", es.eigenvalues());
  const Vec g = B.transpose() * pt.grad;
  const double c = 2.0 / ((n - 1.0) * (n - 1.0));
  const Mat M = Mat::Identity(g.size(), g.size()) + c * g * g.transpose();
  const Mat negH = -H;
  return negH.ldlt().solve(M).trace() - 2.0 / (n - 1.0) * pt.I_m;
}

}  // namespace bubblelab
