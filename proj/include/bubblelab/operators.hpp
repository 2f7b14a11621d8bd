#pragma once

#include "bubblelab/core.hpp"
#include "bubblelab/measure.hpp"

namespace bubblelab {

struct SimplexOperator {
  Mat matrix;  // q x q
  Mat coeff;   // F_ij in F = sum F_ij e_ij e_ij^T
  Mat coeff_stderr;
  std::string label;
  std::string backend;
};

struct AmbientOperator {
  Mat matrix;  // q x (n+1)
  Mat stderr_;
  std::string label;
};

AmbientOperator op_C(const ClusterParams& P);
AmbientOperator op_N(const ClusterParams& P, const InterfaceGraph& graph, const IntegrationConfig& cfg);

// Throws DomainError unless <c_i, xi> + kappa_i = 0 within 1e-8.
SimplexOperator op_F_pcf(const ClusterParams& P, const InterfaceGraph& graph, const Vec& xi,
                         const IntegrationConfig& cfg);
// Throws DomainError unless N is a pole.
SimplexOperator op_F0(const ClusterParams& P, const InterfaceGraph& graph, const Vec& N,
                      const IntegrationConfig& cfg);

SimplexOperator from_laplacian(const WeightedLaplacian& W, double scale, const std::string& label);

struct FcnResidual {
  double max_abs = 0.0;       // |FC - N|_max
  double trace_residual = 0.0;  // tr(F C C^T) - perimeter
};
FcnResidual check_FC_eq_N(const SimplexOperator& F, const AmbientOperator& C, const AmbientOperator& N,
                          double perimeter);

// tr_E(F (Id/2 + kappa kappa^T)) - perimeter
double check_trace_identity(const SimplexOperator& F, const Vec& kappa, double perimeter);

struct LocalityReport {
  double max_empty = 0.0;
  std::vector<std::pair<int, int>> empty_pairs;
  Mat coeff;
};
// Decomposes a symmetric operator annihilating 1 as sum F_ij e_ij e_ij^T.
Mat decompose_laplacian(const Mat& F);
LocalityReport locality_probe(const SimplexOperator& F, const InterfaceGraph& graph);

// ---- estimators with per-sample error bars -------------------------------

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double sigma() const;  // |value| / stderr (inf when stderr is 0 and value nonzero)
};

struct MatrixEstimate {
  Mat value;
  Mat stderr_;
  double max_abs() const;
  double max_sigma(double floor = 1e-12) const;  // max |value| / (stderr + floor)
};

// FC - N for F = L_{weight}: sum_ij e_ij (integral of weight c_ij - n_ij), estimated jointly.
MatrixEstimate fc_minus_n(const ClusterParams& P, const InterfaceGraph& graph, const PointWeight& weight,
                          const IntegrationConfig& cfg);

// tr_E(L_weight (Id/2 + kappa kappa^T)) - perimeter, estimated jointly.
Estimate trace_residual(const ClusterParams& P, const InterfaceGraph& graph, const PointWeight& weight,
                        const IntegrationConfig& cfg);

PointWeight psi_weight(const Vec& xi);
PointWeight f0_weight(const Vec& N, int n);

// Smallest eigenvalue of an assembled Laplacian on E^{(q-1)} with its error bar
// from the coefficient standard errors.
Estimate lambda_min_estimate(const SimplexOperator& F);

// F_t - F_0 along the conformal perturbation, pulled back to Sigma with
// antithetic reflection p -> p - 2<p,N>N so that the 1/t part cancels per sample.
struct ConformalLimitReport {
  std::vector<double> times;
  std::vector<MatrixEstimate> diff;  // F_t - F_0 for each time
  std::vector<double> norms;         // |F_t - F_0|_max
  MatrixEstimate extrapolated;       // fit a + b t^2 + c t^4 evaluated at t = 0
  MatrixEstimate f0;
  bool monotone = false;
  double extrapolated_sigma = 0.0;   // against the sampling error alone
  // |extrapolated - lower-order extrapolant from the two smallest times|: the
  // truncation error of the polynomial fit, which sampling noise does not see
  Mat truncation;
  double extrapolated_error_sigma = 0.0;  // against hypot(stderr, truncation)
};

ConformalLimitReport conformal_limit(const ClusterParams& P, const InterfaceGraph& graph, const Vec& N,
                                     const std::vector<double>& times, const IntegrationConfig& cfg);

// Direct assembly of F_t = L_{Psi_{xi_t}} on the conformal step at time t.
SimplexOperator conformal_F(const ClusterParams& P, const InterfaceGraph& graph, const Vec& N, double t,
                            const IntegrationConfig& cfg);

}  // namespace bubblelab
