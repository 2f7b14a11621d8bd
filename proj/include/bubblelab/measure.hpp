#pragma once

#include "bubblelab/core.hpp"

#include <Eigen/Geometry>
#include <functional>

namespace bubblelab {

struct MeasureReport {
  std::string backend;  // exact_s2 | projected | monte_carlo
  std::uint64_t seed = 0;
  long long samples = 0;
  Vec volumes;
  Vec volume_stderr;
  Mat areas;
  Mat area_stderr;
  double total_perimeter = 0.0;
  double perimeter_stderr = 0.0;
  bool normalized = true;
};

struct McConfig {
  long long samples = 1000000;
  std::uint64_t seed = 1;
  int workers = 0;
};

MeasureReport measure_mc(const ClusterParams& P, const InterfaceGraph& graph, const McConfig& cfg);
MeasureReport measure_mc_volumes(const ClusterParams& P, const McConfig& cfg);

// Exact computation on S^2 from the circular-arc arrangement.
MeasureReport measure_exact_s2(const ClusterParams& P);

// Deterministic quadrature for clusters whose quasi-centers span at most a
// 2-plane (n >= 2): the problem reduces to a disk with a radial weight.
MeasureReport measure_projected(const ClusterParams& P);
bool projected_applicable(const ClusterParams& P);

// Chooses exact_s2 on S^2, projected for rank <= 2, Monte Carlo otherwise.
MeasureReport measure_auto(const ClusterParams& P, const InterfaceGraph& graph, const McConfig& cfg);

MeasureReport raw_measure(const MeasureReport& r, int n);

// ---- S^2 arrangement -------------------------------------------------------

struct CircleArc {
  int i = 0, j = 0;  // i < j; cell i lies to the left of the direction of travel
  Eigen::Vector3d axis;  // cap centre on the side of cell i
  double cos_rho = 0.0, sin_rho = 1.0;
  Eigen::Vector3d u, w;  // (u, w, axis) right-handed
  double phi0 = 0.0, phi1 = 0.0;
  bool full_circle = false;

  Eigen::Vector3d point(double phi) const;
  Eigen::Vector3d tangent(double phi) const;  // unit, increasing phi
  double length() const { return sin_rho * (phi1 - phi0); }
  // arclength parametrisation s in [0, length]
  Eigen::Vector3d at(double s) const { return point(phi0 + s / sin_rho); }
  Eigen::Vector3d tangent_at(double s) const { return tangent(phi0 + s / sin_rho); }
};

struct ArcVertex {
  Eigen::Vector3d p;
  std::vector<int> cells;                      // classify_point with tie 1e-7
  std::vector<std::pair<int, int>> arc_ends;   // (arc index, 0 = start / 1 = end)
};

struct S2Arrangement {
  std::vector<CircleArc> arcs;
  std::vector<ArcVertex> vertices;
  Vec cell_areas;  // raw (steradians)
};

struct ArrangementError : std::runtime_error {
  ArrangementError(const std::string& w, int cell_) : std::runtime_error(w), cell(cell_) {}
  int cell;
};

S2Arrangement build_arrangement_s2(const ClusterParams& P);

// Integral of `w` over the arc with respect to arclength (raw measure).
double arc_integral(const CircleArc& a, const std::function<double(const Eigen::Vector3d&)>& w);
Eigen::Vector3d arc_integral_vec(const CircleArc& a,
                                 const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& w);

// ---- interface moments ----------------------------------------------------

using PointWeight = std::function<double(const Vec&)>;

struct WeightedLaplacian {
  Mat matrix;
  Mat coeff;         // A^{ij}, symmetric, zero diagonal
  Mat coeff_stderr;
  std::string weight_label;
  std::string backend;
};

Mat assemble_laplacian(const Mat& A);

enum class IntegrationBackend { exact_s2, monte_carlo };

struct IntegrationConfig {
  IntegrationBackend backend = IntegrationBackend::monte_carlo;
  McConfig mc;
};

IntegrationConfig default_integration(const ClusterParams& P, const McConfig& mc = {});

// Vector-valued integrand over a single interface Sigma_ij in normalized
// measure; per-sample statistics make differences of moments honest.
using PairIntegrand = std::function<void(const Vec& p, Vec& out)>;
struct PairMoments {
  Vec value;
  Vec stderr_;
};
PairMoments integrate_interface(const ClusterParams& P, int i, int j, int dim,
                                const PairIntegrand& g, const IntegrationConfig& cfg,
                                const S2Arrangement* arr = nullptr);

WeightedLaplacian weighted_laplacian(const ClusterParams& P, const InterfaceGraph& graph,
                                     const PointWeight& weight, const std::string& label,
                                     const IntegrationConfig& cfg);

struct PositiveDefiniteReport {
  Vec eigenvalues;  // on E^{(q-1)}, ascending
  bool positive_definite = false;
};
PositiveDefiniteReport check_positive_definite(const Mat& L, double tol = 1e-12);

}  // namespace bubblelab
