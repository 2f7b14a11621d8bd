#pragma once

#include "bubblelab/core.hpp"
#include "bubblelab/measure.hpp"

#include <optional>

namespace bubblelab {

// kappa_i -> kappa_i cosh t, c_i -> c_i - kappa_i sinh t N for a pole N.
ClusterParams conformal_step(const ClusterParams& P, const Vec& N, double t);

struct PcfFit {
  Vec xi;             // minimal-norm least-squares solution of <c_i, xi> = -kappa_i
  double residual = 0.0;  // max_i |<c_i, xi> + kappa_i|
  bool conformally_flat = false;  // |xi| < 1
};

PcfFit pcf_fit(const ClusterParams& P);
std::optional<PcfFit> pcf_detect(const ClusterParams& P, double tol = 1e-8);

struct LseSolution {
  Mat delta_centers;  // q x (n+1), rows sum to zero
  Vec delta_kappa;    // = a
  double residual = 0.0;
  bool closed_form_checked = false;
  double closed_form_residual = 0.0;
};

// Max over nonempty pairs of |<c_ij, dc_ij> - kappa_ij a_ij|.
double lse_residual(const ClusterParams& P, const InterfaceGraph& graph, const Mat& dC, const Vec& a);
LseSolution lse_solve(const ClusterParams& P, const InterfaceGraph& graph, const Vec& a);

// Gram data in the orthonormal basis B of E^{(q-1)}: X = B^T C = sqrt(G) U.
struct GramFactor {
  Mat B;       // q x (q-1)
  Mat G;       // (q-1) x (q-1)
  Mat target;  // Id/2 + (B^T kappa)(B^T kappa)^T
  Mat U;       // (q-1) x (n+1), orthonormal rows
};
GramFactor gram_factor(const ClusterParams& P);
Mat gram_matrix_at(const GramFactor& f, double t);
ClusterParams gram_path(const ClusterParams& P, double t);
ClusterParams gram_path(const ClusterParams& P, const GramFactor& f, double t);

struct GramStep {
  double t = 0.0;
  Vec volumes, volume_stderr;
  double perimeter = 0.0, perimeter_stderr = 0.0;
  double max_volume_dev = 0.0;  // |V(t) - V(0)|, entrywise max
  double volume_dev_sigma = 0.0;  // max_k |dV_k| / stderr_k (0 for exact backends)
  double perimeter_dev = 0.0;
  double perimeter_dev_sigma = 0.0;
  double lambda_min = 0.0;        // of G_t on E^{(q-1)}
  bool new_interface = false;
  std::vector<std::pair<int, int>> new_pairs;
};

struct GramCheckConfig {
  McConfig mc;
  DetectConfig detect;
  int plateau_budget = 8;
  std::uint64_t plateau_seed = 3;
  bool force_mc = false;
};

struct GramInvarianceReport {
  bool precondition_ok = true;
  std::vector<std::string> precondition_failures;
  std::string backend;
  std::vector<GramStep> steps;
  std::optional<double> first_new_interface;
  double max_volume_dev = 0.0;      // over steps before the first new interface
  double max_perimeter_dev = 0.0;
  double max_dev_sigma = 0.0;
  double min_lambda_gap = 0.0;      // min_t lambda_min(G_t) - t/2 over t > 0
};

GramInvarianceReport gram_invariance_check(const ClusterParams& P, double t_max, int steps,
                                           const GramCheckConfig& cfg = {});

}  // namespace bubblelab
