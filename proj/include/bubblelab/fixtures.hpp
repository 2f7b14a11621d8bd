#pragma once

#include "bubblelab/core.hpp"

namespace bubblelab::fixtures {

// Two hemispheres of S^n split by the great sphere x_1 = 0.
ClusterParams hemispheres(int n);

// Geodesic cap on S^2 as a standard 1-bubble with kappa_12 = k12.
ClusterParams cap(double k12);

// Perpendicular 4-cluster on S^2 whose quasi-centers form two planar
// triangles (0,1,2) and (1,2,3) glued along (1,2); interface 03 is empty.
ClusterParams kite(const Vec& kappa);
ClusterParams kite();

// Four lunes meeting at the poles; not 2-Plateau there.
ClusterParams four_lunes();

// Affine 3-cluster whose cells 1 and 2 touch at a single point.
ClusterParams cushion();

// 5-cluster on S^2 with exactly seven nonempty interfaces.
ClusterParams five_cluster(double y = 2.0);
std::vector<std::pair<int, int>> five_cluster_pairs();

// Standard bubble on S^2 with q in {2,3,4}, random curvature and orientation.
ClusterParams random_standard_s2(std::uint64_t seed, double kappa_scale = 0.5);

Vec random_kappa(int q, std::uint64_t seed, double scale = 0.5);

// Lifts a cluster on S^n to S^{n+extra} by padding quasi-centers with zeros.
ClusterParams lift(const ClusterParams& P, int extra);

}  // namespace bubblelab::fixtures
