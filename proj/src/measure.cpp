#include "bubblelab/measure.hpp"

#include "bubblelab/sampling.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bubblelab {

MeasureReport measure_mc_volumes(const ClusterParams& P, const McConfig& cfg) {
  if (cfg.samples <= 0) throw DomainError("samples must be positive");
  const std::uint64_t sid = stream_id(17);
  const int d = P.dim();
  SampleStats st = sample_mean(
      cfg.samples, P.q,
      [&](long long s, Vec& out) {
        CounterRng rng(cfg.seed, sid, static_cast<std::uint64_t>(s));
        out(argmin_cell(P, rng.unit_vec(d))) = 1.0;
      },
      cfg.workers);
  MeasureReport r;
  r.backend = "monte_carlo";
  r.seed = cfg.seed;
  r.samples = cfg.samples;
  r.volumes = st.mean;
  r.volume_stderr = st.stderr_;
  r.areas = Mat::Zero(P.q, P.q);
  r.area_stderr = Mat::Zero(P.q, P.q);
  return r;
}

MeasureReport measure_mc(const ClusterParams& P, const InterfaceGraph& graph, const McConfig& cfg) {
  MeasureReport r = measure_mc_volumes(P, cfg);
  IntegrationConfig ic;
  ic.backend = IntegrationBackend::monte_carlo;
  ic.mc = cfg;
  double var = 0.0;
  for (auto [i, j] : graph.pairs()) {
    const PairMoments m =
        integrate_interface(P, i, j, 1, [](const Vec&, Vec& out) { out(0) = 1.0; }, ic);
    r.areas(i, j) = r.areas(j, i) = m.value(0);
    r.area_stderr(i, j) = r.area_stderr(j, i) = m.stderr_(0);
    r.total_perimeter += m.value(0);
    var += m.stderr_(0) * m.stderr_(0);
  }
  r.perimeter_stderr = std::sqrt(var);
  return r;
}

MeasureReport measure_auto(const ClusterParams& P, const InterfaceGraph& graph, const McConfig& cfg) {
  if (P.n == 2) return measure_exact_s2(P);
  if (projected_applicable(P)) return measure_projected(P);
  return measure_mc(P, graph, cfg);
}

MeasureReport raw_measure(const MeasureReport& r, int n) {
  MeasureReport out = r;
  const double s = sphere_area(n);
  out.volumes *= s;
  out.volume_stderr *= s;
  out.areas *= s;
  out.area_stderr *= s;
  out.total_perimeter *= s;
  out.perimeter_stderr *= s;
  out.normalized = false;
  return out;
}

IntegrationConfig default_integration(const ClusterParams& P, const McConfig& mc) {
  IntegrationConfig c;
  c.backend = (P.n == 2) ? IntegrationBackend::exact_s2 : IntegrationBackend::monte_carlo;
  c.mc = mc;
  return c;
}

PairMoments integrate_interface(const ClusterParams& P, int i, int j, int dim,
                                const PairIntegrand& g, const IntegrationConfig& cfg,
                                const S2Arrangement* arr) {
  PairMoments out{Vec::Zero(dim), Vec::Zero(dim)};
  if (cfg.backend == IntegrationBackend::exact_s2) {
    S2Arrangement local;
    if (!arr) {
      local = build_arrangement_s2(P);
      arr = &local;
    }
    const auto& [x, w] = detail::gauss_legendre(16);
    Vec val(dim);
    for (const CircleArc& a : arr->arcs) {
      if (a.i != i || a.j != j) continue;
      const double dphi = a.phi1 - a.phi0;
      const int panels = std::max(2, static_cast<int>(std::ceil(dphi / (std::numbers::pi / 16))));
      const double h = dphi / panels;
      for (int pnl = 0; pnl < panels; ++pnl) {
        const double lo = a.phi0 + pnl * h;
        for (std::size_t k = 0; k < x.size(); ++k) {
          const Vec p = a.point(lo + 0.5 * h * (x[k] + 1.0));
          val.setZero();
          g(p, val);
          out.value += (0.5 * h * w[k] * a.sin_rho) * val;
        }
      }
    }
    out.value /= 4.0 * std::numbers::pi;
    return out;
  }

  const PairSphere S = pair_sphere(P, i, j);
  if (!S.proper) return out;
  const double factor = sphere_area(P.n - 1) * std::pow(S.radius, P.n - 1) / sphere_area(P.n);
  const std::uint64_t sid = stream_id(21, i, j);
  SampleStats st = sample_mean(
      cfg.mc.samples, dim,
      [&](long long s, Vec& o) {
        CounterRng rng(cfg.mc.seed, sid, static_cast<std::uint64_t>(s));
        const Vec p = sample_on_pair_sphere(S, rng);
        if (P.q == 2 || pair_margin(P, i, j, p) > 0.0) g(p, o);
      },
      cfg.mc.workers);
  out.value = factor * st.mean;
  out.stderr_ = factor * st.stderr_;
  return out;
}

Mat assemble_laplacian(const Mat& A) {
  const int q = static_cast<int>(A.rows());
  Mat L = Mat::Zero(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      const double a = A(i, j);
      L(i, i) += a;
      L(j, j) += a;
      L(i, j) -= a;
      L(j, i) -= a;
    }
  return L;
}

WeightedLaplacian weighted_laplacian(const ClusterParams& P, const InterfaceGraph& graph,
                                     const PointWeight& weight, const std::string& label,
                                     const IntegrationConfig& cfg) {
  WeightedLaplacian W;
  W.weight_label = label;
  W.backend = cfg.backend == IntegrationBackend::exact_s2 ? "exact_s2" : "monte_carlo";
  W.coeff = Mat::Zero(P.q, P.q);
  W.coeff_stderr = Mat::Zero(P.q, P.q);
  S2Arrangement arr;
  const S2Arrangement* ap = nullptr;
  if (cfg.backend == IntegrationBackend::exact_s2) {
    arr = build_arrangement_s2(P);
    ap = &arr;
  }
  for (auto [i, j] : graph.pairs()) {
    const PairMoments m =
        integrate_interface(P, i, j, 1, [&](const Vec& p, Vec& o) { o(0) = weight(p); }, cfg, ap);
    W.coeff(i, j) = W.coeff(j, i) = m.value(0);
    W.coeff_stderr(i, j) = W.coeff_stderr(j, i) = m.stderr_(0);
  }
  W.matrix = assemble_laplacian(W.coeff);
  return W;
}

PositiveDefiniteReport check_positive_definite(const Mat& L, double tol) {
  const Mat B = simplex_basis(static_cast<int>(L.rows()));
  const Mat R = B.transpose() * (0.5 * (L + L.transpose())) * B;
  Eigen::SelfAdjointEigenSolver<Mat> es(R);
  PositiveDefiniteReport rep;
  rep.eigenvalues = es.eigenvalues();
  const double scale = std::max(1.0, rep.eigenvalues.cwiseAbs().maxCoeff());
  rep.positive_definite = rep.eigenvalues.minCoeff() > tol * scale;
  return rep;
}

}  // namespace bubblelab
