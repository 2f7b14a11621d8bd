#include "bubblelab/core.hpp"

#include "bubblelab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace bubblelab {

ClusterParams make_cluster(int n, const Mat& centers, const Vec& kappa, std::string label,
                           double* correction) {
  if (n < 1) throw DomainError("n must be at least 1");
  const int q = static_cast<int>(centers.rows());
  if (q < 2) throw DomainError("need at least two cells");
  if (centers.cols() != n + 1) throw DomainError("quasi-centers must live in R^{n+1}");
  if (kappa.size() != q) throw DomainError("curvature vector length must equal q");
  if (!centers.allFinite() || !kappa.allFinite()) throw DomainError("non-finite parameters");

  ClusterParams P;
  P.n = n;
  P.q = q;
  Eigen::RowVectorXd cmean = centers.colwise().mean();
  const double kmean = kappa.mean();
  P.centers = centers.rowwise() - cmean;
  P.kappa = kappa.array() - kmean;
  P.label = std::move(label);
  if (correction) *correction = std::max(cmean.cwiseAbs().maxCoeff(), std::abs(kmean));
  return P;
}

void check_conventions(const ClusterParams& P, double tol) {
  if (P.centers.rows() != P.q || P.centers.cols() != P.n + 1 || P.kappa.size() != P.q)
    throw DomainError("inconsistent cluster dimensions");
  const double cs = P.centers.colwise().sum().cwiseAbs().maxCoeff();
  const double ks = std::abs(P.kappa.sum());
  if (cs > tol || ks > tol) {
    std::ostringstream os;
    os << "sum conventions violated: |sum c| = " << cs << ", |sum kappa| = " << ks;
    throw DomainError(os.str());
  }
}

Mat simplex_basis(int q) {
  Mat B = Mat::Zero(q, q - 1);
  for (int k = 0; k < q - 1; ++k) {
    Vec v = Vec::Zero(q);
    v(k) = 1.0;
    v(k + 1) = -1.0;
    for (int m = 0; m < k; ++m) v -= B.col(m).dot(v) * B.col(m);
    B.col(k) = v / v.norm();
  }
  return B;
}

Vec e_ij(int q, int i, int j) {
  Vec e = Vec::Zero(q);
  e(i) += 1.0;
  e(j) -= 1.0;
  return e;
}

double trace_on_E(const Mat& M) {
  const Mat B = simplex_basis(static_cast<int>(M.rows()));
  return (B.transpose() * M * B).trace();
}

double sphere_area(int k) {
  const double a = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, a) / std::tgamma(a);
}

std::vector<int> classify_point(const ClusterParams& P, const Vec& p, double tie_tol) {
  if (p.size() != P.dim()) throw DomainError("point dimension mismatch");
  if (std::abs(p.norm() - 1.0) > 1e-12) throw DomainError("classify_point needs a unit vector");
  const Vec f = P.affine_all(p);
  const double m = f.minCoeff();
  std::vector<int> out;
  for (int i = 0; i < P.q; ++i)
    if (f(i) <= m + tie_tol) out.push_back(i);
  return out;
}

int argmin_cell(const ClusterParams& P, const Vec& p) {
  int best = 0;
  double bv = std::numeric_limits<double>::infinity();
  for (int i = 0; i < P.q; ++i) {
    const double v = P.affine(i, p);
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  return best;
}

PairSphere pair_sphere(const ClusterParams& P, int i, int j) {
  PairSphere S;
  const Vec c = P.cij(i, j);
  const double k = P.kij(i, j);
  const double cn = c.norm();
  S.center = Vec::Zero(P.dim());
  S.unit_normal = Vec::Zero(P.dim());
  if (cn < 1e-14) return S;
  S.unit_normal = c / cn;
  S.center = -k * c / (cn * cn);
  const double r2 = 1.0 - (k * k) / (cn * cn);
  if (r2 <= 1e-14) return S;
  S.radius = std::sqrt(r2);
  S.proper = true;
  return S;
}

double pair_margin(const ClusterParams& P, int i, int j, const Vec& p) {
  const Vec f = P.affine_all(p);
  const double base = std::max(f(i), f(j));
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < P.q; ++k)
    if (k != i && k != j) m = std::min(m, f(k) - base);
  return m;
}

std::vector<std::pair<int, int>> InterfaceGraph::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j)
      if (nonempty[i][j]) out.emplace_back(i, j);
  return out;
}

InterfaceGraph InterfaceGraph::complete(int q) {
  InterfaceGraph g = empty(q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) g.nonempty[i][j] = (i != j);
  return g;
}

InterfaceGraph InterfaceGraph::empty(int q) {
  InterfaceGraph g;
  g.q = q;
  g.nonempty.assign(q, std::vector<char>(q, 0));
  return g;
}

namespace {

// Soft-min ascent of the pair margin over the sphere S_ij, starting at p0.
Vec refine_witness(const ClusterParams& P, int i, int j, const PairSphere& S, Vec p0) {
  const int d = P.dim();
  Vec u = (p0 - S.center);
  u -= u.dot(S.unit_normal) * S.unit_normal;
  if (u.norm() < 1e-300) return p0;
  u.normalize();
  auto point = [&](const Vec& uu) {
    Vec p = S.center + S.radius * uu;
    return Vec(p / p.norm());
  };
  double best = pair_margin(P, i, j, point(u));
  double step = 0.5;
  double beta = 10.0;
  for (int it = 0; it < 600 && step > 1e-10; ++it) {
    const Vec p = point(u);
    const Vec f = P.affine_all(p);
    const double base = 0.5 * (f(i) + f(j));
    double mmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < P.q; ++k)
      if (k != i && k != j) mmin = std::min(mmin, f(k) - base);
    Vec grad = Vec::Zero(d);
    double wsum = 0.0;
    for (int k = 0; k < P.q; ++k) {
      if (k == i || k == j) continue;
      const double w = std::exp(-beta * (f(k) - base - mmin));
      grad += w * S.radius * (P.c(k) - 0.5 * (P.c(i) + P.c(j)));
      wsum += w;
    }
    grad /= wsum;
    grad -= grad.dot(S.unit_normal) * S.unit_normal;
    grad -= grad.dot(u) * u;
    const double gn = grad.norm();
    if (gn < 1e-14) break;
    Vec trial = u + step * grad / gn;
    trial.normalize();
    const double m = pair_margin(P, i, j, point(trial));
    if (m > best) {
      best = m;
      u = trial;
      beta = std::min(beta * 1.3, 1e6);
    } else {
      step *= 0.5;
    }
  }
  return point(u);
}

}  // namespace

double spherical_residual(const ClusterParams& P, int i, int j) {
  const double k = P.kij(i, j);
  return P.cij(i, j).squaredNorm() - 1.0 - k * k;
}

InterfaceGraph detect_interfaces(const ClusterParams& P, const DetectConfig& cfg) {
  check_conventions(P, 1e-9);
  InterfaceGraph g = InterfaceGraph::empty(P.q);
  for (int i = 0; i < P.q; ++i) {
    for (int j = i + 1; j < P.q; ++j) {
      const PairSphere S = pair_sphere(P, i, j);
      if (!S.proper) {
        std::ostringstream os;
        os << "pair (" << i << "," << j << "): S_ij is empty or a point";
        g.diagnostics.push_back(os.str());
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      Vec bestp;
      const std::uint64_t sid = stream_id(11, i, j);
      for (int s = 0; s < cfg.samples_per_pair; ++s) {
        CounterRng rng(cfg.seed, sid, static_cast<std::uint64_t>(s));
        Vec p = sample_on_pair_sphere(S, rng);
        const double m = (P.q == 2) ? 1.0 : pair_margin(P, i, j, p);
        if (m > best) {
          best = m;
          bestp = p;
        }
        if (P.q == 2) break;
      }
      if (best <= cfg.tie_tol && cfg.refine && bestp.size() > 0) {
        Vec r = refine_witness(P, i, j, S, bestp);
        const double m = pair_margin(P, i, j, r);
        if (m > best) {
          best = m;
          bestp = r;
        }
      }
      if (best > cfg.tie_tol) {
        g.nonempty[i][j] = g.nonempty[j][i] = 1;
        g.witness[{i, j}] = bestp;
        if (std::abs(spherical_residual(P, i, j)) > cfg.spherical_tol) {
          g.affine_only = true;
          std::ostringstream os;
          os << "pair (" << i << "," << j << ") is nonempty but |c_ij|^2 - 1 - kappa_ij^2 = "
             << spherical_residual(P, i, j) << ": affine, not spherical Voronoi";
          g.diagnostics.push_back(os.str());
        }
      }
    }
  }
  g.diagnostics.push_back(
      "nonemptiness is sampled; interfaces much smaller than the sample spacing may be missed");
  return g;
}

SphericalReport validate_spherical(const ClusterParams& P, const InterfaceGraph& graph,
                                   double tol) {
  SphericalReport rep;
  for (auto [i, j] : graph.pairs()) {
    const double r = spherical_residual(P, i, j);
    rep.max_residual = std::max(rep.max_residual, std::abs(r));
    if (std::abs(r) > tol) {
      rep.passes = false;
      rep.violations.push_back({i, j, r});
    }
  }
  return rep;
}

int numerical_rank(const Mat& A, double rel_tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  const Vec s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 1e-300) return 0;
  int r = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s(k) > rel_tol * s(0)) ++r;
  return r;
}

int affine_rank(const ClusterParams& P, double rel_tol) {
  Mat D = P.centers.rowwise() - P.centers.row(0);
  return numerical_rank(D, rel_tol);
}

std::optional<Vec> perpendicular_pole(const ClusterParams& P, double tol) {
  const int d = P.dim();
  Eigen::JacobiSVD<Mat> svd(P.centers, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  int rank = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s(k) > tol * scale) ++rank;
  if (rank >= d) return std::nullopt;
  const Mat Z = svd.matrixV().rightCols(d - rank);
  int best = 0;
  double bn = -1.0;
  for (int k = 0; k < d; ++k) {
    const double v = Z.row(k).norm();
    if (v > bn + 1e-9) {
      bn = v;
      best = k;
    }
  }
  Vec N = Z * Z.row(best).transpose();
  N.normalize();
  if (N(best) < 0) N = -N;
  return N;
}

ClusterParams rotate(const ClusterParams& P, const Mat& Q) {
  ClusterParams R = P;
  R.centers = P.centers * Q.transpose();
  return R;
}

ClusterParams permute(const ClusterParams& P, const std::vector<int>& perm) {
  ClusterParams R = P;
  for (int k = 0; k < P.q; ++k) {
    R.centers.row(k) = P.centers.row(perm[k]);
    R.kappa(k) = P.kappa(perm[k]);
  }
  return R;
}

Mat random_orthogonal(int d, std::uint64_t seed) {
  Mat G(d, d);
  CounterRng rng(seed, stream_id(3), 0);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) G(r, c) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k)
    if (R(k, k) < 0) Q.col(k) = -Q.col(k);
  return Q;
}

}  // namespace bubblelab
