#pragma once

#include "bubblelab/core.hpp"
#include "bubblelab/deform.hpp"

#include <optional>

namespace bubblelab {

struct BlowUpCone {
  Vec p;
  std::vector<int> incidence;
  Mat normals;  // |I_p| x (n+1): centered projected normals, rows sum to zero
  int affine_rank = 0;
};

BlowUpCone blowup_at(const ClusterParams& P, const Vec& p, double tie_tol = 1e-9);

struct PlateauCheck {
  bool plateau = false;
  bool rank_test = false;   // affine_rank == |I_p| - 1
  bool gram_test = false;   // |N N^T - Id/2 on E^{I_p}|_max <= tol
  double gram_residual = 0.0;
};

PlateauCheck plateau_at(const BlowUpCone& cone, double tol = 1e-8);

struct PlateauPoint {
  Vec p;
  std::vector<int> incidence;
  int affine_rank = 0;
  bool plateau = false;
  double gram_residual = 0.0;
};

struct PlateauReport {
  int plateau_up_to = 0;  // largest l such that every sampled point of arank <= l is Plateau
  bool fully_plateau = false;
  bool found_multi = false;  // some point with |I_p| >= 3 was found
  int arank_C = 0;
  std::vector<PlateauPoint> points;  // deduplicated singular points (|I_p| >= 3)
  std::vector<PlateauPoint> worst;   // non-Plateau points
  int interface_points = 0;
  double max_interface_normal_error = 0.0;  // | |n~_ij| - 1 | over sampled interface points
  std::string note;
};

PlateauReport certify_plateau(const ClusterParams& P, const InterfaceGraph& graph, int budget = 8,
                              std::uint64_t seed = 3);

// Newton projection onto {<c_{s0 s}, p> + kappa_{s0 s} = 0 for s in S} intersected with the sphere.
std::optional<Vec> project_to_stratum(const ClusterParams& P, const std::vector<int>& S, Vec p0,
                                      int max_iter = 50);

struct TriplePointCheck {
  Vec p;
  int u = 0, v = 0, w = 0;
  double normal_sum = 0.0;        // |n_uv + n_vw + n_wu|
  double max_angle_error_deg = 0.0;
};

std::vector<TriplePointCheck> triple_point_checks(const ClusterParams& P, const PlateauReport& rep);

enum class Q3Class { plateau, pcf, both, neither };
std::string q3_name(Q3Class c);

struct Q3Report {
  Q3Class cls = Q3Class::neither;
  bool q3_plateau = false;  // certified (q-3)-Plateau
  bool contradiction = false;
  std::string note;
};

Q3Report classify_q3(const ClusterParams& P, const PlateauReport& plateau,
                     const std::optional<PcfFit>& pcf);

}  // namespace bubblelab
