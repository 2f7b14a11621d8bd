#pragma once

#include "bubblelab/core.hpp"

#include <variant>

namespace bubblelab {

struct MobiusFlow {
  Vec theta;  // unit
  double t = 0.0;
};
struct MobiusOrthogonal {
  Mat Q;
};
struct MobiusMap;
struct MobiusComposition {
  std::vector<MobiusMap> maps;  // applied first to last
};
struct MobiusMap {
  std::variant<MobiusFlow, MobiusOrthogonal, MobiusComposition> kind;
};

ClusterParams equal_volume_standard(int n, int q);
ClusterParams standard_of_curvature(int n, int q, const Vec& kappa);

ClusterParams apply_mobius(const ClusterParams& P, const MobiusMap& map);
Vec mobius_point_flow(const Vec& p, const Vec& N, double t);
double mobius_conformal_factor(const Vec& p, const Vec& N, double t);

enum class VolumeBackend { automatic, exact_s2, projected, monte_carlo };

struct NewtonConfig {
  double tol = 1e-12;           // on max |V(kappa) - v|
  int max_iter = 60;
  double fd_step = 1e-6;        // Jacobian step in kappa
  VolumeBackend backend = VolumeBackend::automatic;
  long long mc_samples = 1000000;
  std::uint64_t seed = 7;
};

struct NewtonError : std::runtime_error {
  NewtonError(const std::string& what, Vec last, double res)
      : std::runtime_error(what), last_kappa(std::move(last)), residual(res) {}
  Vec last_kappa;
  double residual;
};

// Volumes of the standard bubble with curvature kappa (normalized measure).
Vec standard_volumes(int n, int q, const Vec& kappa, const NewtonConfig& cfg);

struct StandardSolve {
  ClusterParams params;
  int iterations = 0;
  double residual = 0.0;
};
StandardSolve standard_of_volume(int n, int q, const Vec& v, const NewtonConfig& cfg = {});

struct ModelProfilePoint {
  Vec v;
  double I_m = 0.0;
  Vec kappa;
  Vec grad;       // in E^{(q-1)}, q-vector
  Mat hessian;    // q x q, supported on E^{(q-1)}
  Mat basis;      // q x (q-1) orthonormal basis used for the differences
  double fd_grad = 0.0;
  double fd_hess = 0.0;
  std::string backend;
};

struct ProfileConfig {
  double fd_grad = 1e-3;
  double fd_hess = 0.0;  // 0 selects a backend-dependent default
  NewtonConfig newton;
};

double model_profile_value(int n, int q, const Vec& v, const NewtonConfig& cfg,
                           Vec* kappa_out = nullptr);
ModelProfilePoint model_profile(int n, int q, const Vec& v, const ProfileConfig& cfg = {});

struct HessianError : std::runtime_error {
  HessianError(const std::string& what, Vec eig) : std::runtime_error(what), eigenvalues(std::move(eig)) {}
  Vec eigenvalues;
};

double pde_residual(const ModelProfilePoint& pt, int n);

// Resolved backend name for the volume/perimeter measurement of standard bubbles.
VolumeBackend resolve_backend(int n, int q, VolumeBackend requested);
std::string backend_name(VolumeBackend b);

}  // namespace bubblelab
