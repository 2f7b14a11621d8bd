#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bubblelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Generating parameters of an affine Voronoi cluster on S^n.
// Row i of `centers` is the quasi-center c_i; cells are argmin_i <c_i,p> + kappa_i.
// Indices are 0-based everywhere in code and reports.
struct ClusterParams {
  int n = 0;
  int q = 0;
  Mat centers;  // q x (n+1)
  Vec kappa;    // q
  std::string label;

  int dim() const { return n + 1; }
  Vec c(int i) const { return centers.row(i).transpose(); }
  Vec cij(int i, int j) const { return (centers.row(i) - centers.row(j)).transpose(); }
  double kij(int i, int j) const { return kappa(i) - kappa(j); }
  double affine(int i, const Vec& p) const { return centers.row(i).dot(p) + kappa(i); }
  Vec affine_all(const Vec& p) const { return centers * p + kappa; }
};

// Builds a cluster and recenters to sum c_i = 0, sum kappa_i = 0.
// `correction` receives the largest shift applied.
ClusterParams make_cluster(int n, const Mat& centers, const Vec& kappa, std::string label = {},
                           double* correction = nullptr);

// Throws DomainError unless the sum conventions hold within `tol`.
void check_conventions(const ClusterParams& P, double tol = 1e-12);

// Orthonormal basis (q x (q-1)) of E^{(q-1)} = {x : sum x = 0} obtained by
// Gram-Schmidt on e_1 - e_2, e_2 - e_3, ...
Mat simplex_basis(int q);
Vec e_ij(int q, int i, int j);

// Trace of an operator restricted to E^{(q-1)}.
double trace_on_E(const Mat& M);

// |S^k| from the Gamma-function closed form.
double sphere_area(int k);

std::vector<int> classify_point(const ClusterParams& P, const Vec& p, double tie_tol = 1e-9);
int argmin_cell(const ClusterParams& P, const Vec& p);

// Geometric sphere S_ij = {p in S^n : <c_ij,p> + kappa_ij = 0}.
struct PairSphere {
  bool proper = false;  // false when S_ij is empty or a single point
  Vec center;           // -kappa c / |c|^2
  Vec unit_normal;      // c_ij / |c_ij|
  double radius = 0.0;
};
PairSphere pair_sphere(const ClusterParams& P, int i, int j);

// Smallest gap min_{k != i,j} f_k(p) - max(f_i(p), f_j(p)).
double pair_margin(const ClusterParams& P, int i, int j, const Vec& p);

struct InterfaceGraph {
  int q = 0;
  std::vector<std::vector<char>> nonempty;
  std::map<std::pair<int, int>, Vec> witness;
  std::vector<std::string> diagnostics;
  bool affine_only = false;  // a nonempty pair violates |c_ij|^2 = 1 + kappa_ij^2

  bool has(int i, int j) const { return nonempty[i][j] != 0; }
  std::vector<std::pair<int, int>> pairs() const;
  static InterfaceGraph complete(int q);
  static InterfaceGraph empty(int q);
};

struct DetectConfig {
  int samples_per_pair = 4096;
  std::uint64_t seed = 1;
  bool refine = true;
  double tie_tol = 1e-9;
  double spherical_tol = 1e-8;
};

InterfaceGraph detect_interfaces(const ClusterParams& P, const DetectConfig& cfg = {});

struct SphericalViolation {
  int i, j;
  double residual;  // |c_ij|^2 - 1 - kappa_ij^2
};

struct SphericalReport {
  bool passes = true;
  double max_residual = 0.0;
  std::vector<SphericalViolation> violations;
};

// Checks |c_ij|^2 = 1 + kappa_ij^2 on the nonempty pairs of `graph`.
SphericalReport validate_spherical(const ClusterParams& P, const InterfaceGraph& graph,
                                   double tol = 1e-10);
double spherical_residual(const ClusterParams& P, int i, int j);

std::optional<Vec> perpendicular_pole(const ClusterParams& P, double tol = 1e-9);

// Number of singular values of `A` above rel_tol * sigma_max.
int numerical_rank(const Mat& A, double rel_tol = 1e-7);
int affine_rank(const ClusterParams& P, double rel_tol = 1e-7);

ClusterParams rotate(const ClusterParams& P, const Mat& Q);
ClusterParams permute(const ClusterParams& P, const std::vector<int>& perm);

// Random orthogonal matrix from the QR of a Gaussian matrix, sign-fixed.
Mat random_orthogonal(int d, std::uint64_t seed);

}  // namespace bubblelab
