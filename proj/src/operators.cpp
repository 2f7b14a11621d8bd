#include "bubblelab/operators.hpp"

#include "bubblelab/deform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bubblelab {

namespace {

// Shared per-pair integration: builds the S^2 arrangement once when needed.
struct PairIntegrator {
  const ClusterParams& P;
  const IntegrationConfig& cfg;
  S2Arrangement arr;
  const S2Arrangement* ap = nullptr;

  PairIntegrator(const ClusterParams& P_, const IntegrationConfig& cfg_) : P(P_), cfg(cfg_) {
    if (cfg.backend == IntegrationBackend::exact_s2) {
      arr = build_arrangement_s2(P);
      ap = &arr;
    }
  }
  PairMoments operator()(int i, int j, int dim, const PairIntegrand& g) const {
    return integrate_interface(P, i, j, dim, g, cfg, ap);
  }
};

// Laplacian assembled from per-pair coefficients with entrywise error bars.
MatrixEstimate laplacian_estimate(const Mat& A, const Mat& Ase) {
  const int q = static_cast<int>(A.rows());
  MatrixEstimate m;
  m.value = assemble_laplacian(A);
  m.stderr_ = Mat::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    double v = 0.0;
    for (int j = 0; j < q; ++j) {
      if (j == i) continue;
      m.stderr_(i, j) = Ase(i, j);
      v += Ase(i, j) * Ase(i, j);
    }
    m.stderr_(i, i) = std::sqrt(v);
  }
  return m;
}

void check_pole(const ClusterParams& P, const Vec& N) {
  if (N.size() != P.dim() || std::abs(N.norm() - 1.0) > 1e-10)
    throw DomainError("pole must be a unit vector in R^{n+1}");
  if ((P.centers * N).cwiseAbs().maxCoeff() > 1e-9)
    throw DomainError("cluster is not perpendicular with respect to the given pole");
}

}  // namespace

double Estimate::sigma() const {
  if (stderr_ > 0) return std::abs(value) / stderr_;
  return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double MatrixEstimate::max_abs() const { return value.cwiseAbs().maxCoeff(); }

double MatrixEstimate::max_sigma(double floor) const {
  double s = 0.0;
  for (int i = 0; i < value.rows(); ++i)
    for (int j = 0; j < value.cols(); ++j)
      s = std::max(s, std::abs(value(i, j)) / (stderr_(i, j) + floor));
  return s;
}

AmbientOperator op_C(const ClusterParams& P) {
  return {P.centers, Mat::Zero(P.q, P.dim()), "C"};
}

AmbientOperator op_N(const ClusterParams& P, const InterfaceGraph& graph, const IntegrationConfig& cfg) {
  const int d = P.dim();
  const PairIntegrator integ(P, cfg);
  AmbientOperator N{Mat::Zero(P.q, d), Mat::Zero(P.q, d), "N"};
  Mat var = Mat::Zero(P.q, d);
  for (auto [i, j] : graph.pairs()) {
    const Vec c = P.cij(i, j);
    const double k = P.kij(i, j);
    const PairMoments m = integ(i, j, d, [&](const Vec& p, Vec& o) { o = c + k * p; });
    N.matrix.row(i) += m.value.transpose();
    N.matrix.row(j) -= m.value.transpose();
    var.row(i) += m.stderr_.cwiseAbs2().transpose();
    var.row(j) += m.stderr_.cwiseAbs2().transpose();
  }
  N.stderr_ = var.cwiseSqrt();
  return N;
}

SimplexOperator from_laplacian(const WeightedLaplacian& W, double scale, const std::string& label) {
  SimplexOperator F;
  F.matrix = scale * W.matrix;
  F.coeff = scale * W.coeff;
  F.coeff_stderr = std::abs(scale) * W.coeff_stderr;
  F.label = label;
  F.backend = W.backend;
  return F;
}

PointWeight psi_weight(const Vec& xi) {
  return [xi](const Vec& p) { return 1.0 - p.dot(xi); };
}

PointWeight f0_weight(const Vec& N, int n) {
  return [N, n](const Vec& p) {
    const double z = p.dot(N);
    return n * z * z;
  };
}

SimplexOperator op_F_pcf(const ClusterParams& P, const InterfaceGraph& graph, const Vec& xi,
                         const IntegrationConfig& cfg) {
  if (xi.size() != P.dim()) throw DomainError("xi has the wrong dimension");
  if ((P.centers * xi + P.kappa).cwiseAbs().maxCoeff() > 1e-8)
    throw DomainError("cluster is not PCF with the given xi");
  return from_laplacian(weighted_laplacian(P, graph, psi_weight(xi), "1 - <p,xi>", cfg), 1.0, "F");
}

SimplexOperator op_F0(const ClusterParams& P, const InterfaceGraph& graph, const Vec& N,
                      const IntegrationConfig& cfg) {
  check_pole(P, N);
  const Vec Nn = N.normalized();
  const PointWeight w = [Nn](const Vec& p) {
    const double z = p.dot(Nn);
    return z * z;
  };
  return from_laplacian(weighted_laplacian(P, graph, w, "<p,N>^2", cfg), P.n, "F0");
}

FcnResidual check_FC_eq_N(const SimplexOperator& F, const AmbientOperator& C, const AmbientOperator& N,
                          double perimeter) {
  FcnResidual r;
  r.max_abs = (F.matrix * C.matrix - N.matrix).cwiseAbs().maxCoeff();
  r.trace_residual = (F.matrix * C.matrix * C.matrix.transpose()).trace() - perimeter;
  return r;
}

double check_trace_identity(const SimplexOperator& F, const Vec& kappa, double perimeter) {
  const int q = static_cast<int>(kappa.size());
  const Mat M = 0.5 * Mat::Identity(q, q) + kappa * kappa.transpose();
  return trace_on_E(F.matrix * M) - perimeter;
}

Mat decompose_laplacian(const Mat& F) {
  const int q = static_cast<int>(F.rows());
  Mat A = Mat::Zero(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      if (i != j) A(i, j) = -0.5 * (F(i, j) + F(j, i));
  return A;
}

LocalityReport locality_probe(const SimplexOperator& F, const InterfaceGraph& graph) {
  LocalityReport r;
  r.coeff = decompose_laplacian(F.matrix);
  for (int i = 0; i < graph.q; ++i)
    for (int j = i + 1; j < graph.q; ++j)
      if (!graph.has(i, j)) {
        r.empty_pairs.emplace_back(i, j);
        r.max_empty = std::max(r.max_empty, std::abs(r.coeff(i, j)));
      }
  return r;
}

MatrixEstimate fc_minus_n(const ClusterParams& P, const InterfaceGraph& graph, const PointWeight& weight,
                          const IntegrationConfig& cfg) {
  const int d = P.dim();
  const PairIntegrator integ(P, cfg);
  MatrixEstimate R{Mat::Zero(P.q, d), Mat::Zero(P.q, d)};
  Mat var = Mat::Zero(P.q, d);
  for (auto [i, j] : graph.pairs()) {
    const Vec c = P.cij(i, j);
    const double k = P.kij(i, j);
    const PairMoments m =
        integ(i, j, d, [&](const Vec& p, Vec& o) { o = (weight(p) - 1.0) * c - k * p; });
    R.value.row(i) += m.value.transpose();
    R.value.row(j) -= m.value.transpose();
    var.row(i) += m.stderr_.cwiseAbs2().transpose();
    var.row(j) += m.stderr_.cwiseAbs2().transpose();
  }
  R.stderr_ = var.cwiseSqrt();
  return R;
}

Estimate trace_residual(const ClusterParams& P, const InterfaceGraph& graph, const PointWeight& weight,
                        const IntegrationConfig& cfg) {
  const PairIntegrator integ(P, cfg);
  Estimate e;
  double var = 0.0;
  for (auto [i, j] : graph.pairs()) {
    const double k2 = 1.0 + P.kij(i, j) * P.kij(i, j);
    const PairMoments m = integ(i, j, 1, [&](const Vec& p, Vec& o) { o(0) = weight(p) * k2 - 1.0; });
    e.value += m.value(0);
    var += m.stderr_(0) * m.stderr_(0);
  }
  e.stderr_ = std::sqrt(var);
  return e;
}

Estimate lambda_min_estimate(const SimplexOperator& F) {
  const int q = static_cast<int>(F.matrix.rows());
  const Mat B = simplex_basis(q);
  Eigen::SelfAdjointEigenSolver<Mat> es(B.transpose() * F.matrix * B);
  const Vec v = B * es.eigenvectors().col(0);
  Estimate e;
  e.value = es.eigenvalues()(0);
  double var = 0.0;
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      const double dv = v(i) - v(j);
      var += std::pow(F.coeff_stderr(i, j), 2) * std::pow(dv, 4);
    }
  e.stderr_ = std::sqrt(var);
  return e;
}

ConformalLimitReport conformal_limit(const ClusterParams& P, const InterfaceGraph& graph, const Vec& N,
                                     const std::vector<double>& times, const IntegrationConfig& cfg) {
  check_pole(P, N);
  const int T = static_cast<int>(times.size());
  if (T < 1) throw DomainError("need at least one time");
  for (double t : times)
    if (t == 0.0) throw DomainError("times must be nonzero");

  // Lagrange weights in x = t^2 for evaluation at x = 0
  std::vector<double> lw(T, 1.0);
  for (int a = 0; a < T; ++a)
    for (int b = 0; b < T; ++b)
      if (b != a) {
        const double xa = times[a] * times[a], xb = times[b] * times[b];
        lw[a] *= xb / (xb - xa);
      }

  // lower-order extrapolant from the two smallest |t|
  std::vector<double> lw2(T, 0.0);
  if (T >= 2) {
    std::vector<int> ord(T);
    for (int a = 0; a < T; ++a) ord[a] = a;
    std::sort(ord.begin(), ord.end(), [&](int x, int y) { return std::abs(times[x]) < std::abs(times[y]); });
    const double x0 = times[ord[0]] * times[ord[0]], x1 = times[ord[1]] * times[ord[1]];
    lw2[ord[0]] = x1 / (x1 - x0);
    lw2[ord[1]] = x0 / (x0 - x1);
  }

  const int n = P.n;
  const PairIntegrator integ(P, cfg);
  const int dim = T + 3;
  std::vector<Mat> A(dim, Mat::Zero(P.q, P.q)), Ase(dim, Mat::Zero(P.q, P.q));
  for (auto [i, j] : graph.pairs()) {
    const PairMoments m = integ(i, j, dim, [&](const Vec& p, Vec& o) {
      const double z = p.dot(N);
      const double f0 = n * z * z;
      double ex = 0.0, ex2 = 0.0;
      for (int a = 0; a < T; ++a) {
        const double t = times[a];
        const double ch = std::cosh(t), sh = std::sinh(t), ct = 1.0 / std::tanh(t);
        auto g = [&](double zz) {
          const double D = ch + zz * sh;
          return (1.0 - ct * (zz * ch + sh) / D) * std::pow(D, -(n - 1));
        };
        const double h = 0.5 * (g(z) + g(-z)) - f0;
        o(a) = h;
        ex += lw[a] * h;
        ex2 += lw2[a] * h;
      }
      o(T) = f0;
      o(T + 1) = ex;
      o(T + 2) = ex - ex2;
    });
    for (int k = 0; k < dim; ++k) {
      A[k](i, j) = A[k](j, i) = m.value(k);
      Ase[k](i, j) = Ase[k](j, i) = m.stderr_(k);
    }
  }
  ConformalLimitReport r;
  r.times = times;
  for (int a = 0; a < T; ++a) {
    r.diff.push_back(laplacian_estimate(A[a], Ase[a]));
    r.norms.push_back(r.diff.back().max_abs());
  }
  r.f0 = laplacian_estimate(A[T], Ase[T]);
  r.extrapolated = laplacian_estimate(A[T + 1], Ase[T + 1]);
  r.extrapolated_sigma = r.extrapolated.max_sigma();
  r.truncation = T >= 2 ? laplacian_estimate(A[T + 2], Ase[T + 2]).value.cwiseAbs().eval() : Mat::Zero(P.q, P.q);
  for (int i = 0; i < P.q; ++i)
    for (int j = 0; j < P.q; ++j) {
      const double err = std::hypot(r.extrapolated.stderr_(i, j), r.truncation(i, j)) + 1e-15;
      r.extrapolated_error_sigma = std::max(r.extrapolated_error_sigma, std::abs(r.extrapolated.value(i, j)) / err);
    }

  // monotone decrease as t shrinks
  std::vector<int> order(T);
  for (int a = 0; a < T; ++a) order[a] = a;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return std::abs(times[x]) > std::abs(times[y]); });
  r.monotone = true;
  for (int a = 1; a < T; ++a)
    if (r.norms[order[a]] >= r.norms[order[a - 1]]) r.monotone = false;
  return r;
}

SimplexOperator conformal_F(const ClusterParams& P, const InterfaceGraph& graph, const Vec& N, double t,
                            const IntegrationConfig& cfg) {
  check_pole(P, N);
  if (t == 0.0) throw DomainError("conformal_F needs t != 0; use op_F0 for the limit");
  const ClusterParams Pt = conformal_step(P, N, t);
  const Vec xi = N / std::tanh(t);
  SimplexOperator F = op_F_pcf(Pt, graph, xi, cfg);
  F.label = "F_t";
  return F;
}

}  // namespace bubblelab
