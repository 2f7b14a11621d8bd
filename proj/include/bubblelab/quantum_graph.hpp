#pragma once

#include "bubblelab/core.hpp"
#include "bubblelab/measure.hpp"

#include <Eigen/Sparse>
#include <array>
#include <functional>

namespace bubblelab {

using SpMat = Eigen::SparseMatrix<double>;

struct QgArc {
  int i = 0, j = 0;       // f on this arc is f_ij with i < j
  double kappa = 0.0;     // kappa_ij
  double length = 0.0;
  bool periodic = false;
  CircleArc geom;
  int v_start = -1, v_end = -1;
  double robin_start = 0.0, robin_end = 0.0;  // (kappa_ik + kappa_jk) / sqrt(3)
};

struct QgVertex {
  Eigen::Vector3d p;
  std::array<int, 3> cells{};         // u < v < w
  std::array<int, 3> arc{};           // arcs of (u,v), (v,w), (u,w)
  std::array<int, 3> end{};           // 0 = arc start, 1 = arc end
};

struct QuantumGraph {
  ClusterParams params;
  std::vector<QgArc> arcs;
  std::vector<QgVertex> vertices;
  std::vector<std::string> diagnostics;
};

QuantumGraph build_graph(const ClusterParams& P, const InterfaceGraph& graph);

// Per-arc nodal values; open arcs carry m+1 nodes, periodic arcs m nodes.
struct DiscreteField {
  std::vector<Vec> values;
};

struct JacobiSystem {
  double h = 0.0;
  std::vector<int> cells;       // intervals per arc
  std::vector<double> step;     // actual step per arc
  std::vector<int> offset;      // first full-node index of each arc
  int full_size = 0;
  SpMat A;                      // full quadratic form K - (1 + kappa^2) M - R
  Vec mass;                     // lumped mass (diagonal)
  SpMat Z;                      // reduced -> full
  SpMat Ar, Mr;                 // Z^T A Z, Z^T M Z
  std::vector<int> vertex_dof;  // first reduced dof of each vertex (two per vertex)
  std::vector<char> is_vertex_row;  // per reduced dof
};

JacobiSystem assemble_jacobi(const QuantumGraph& g, double h);

// Eigenvalues lambda of L_Jac are -mu for A_r x = mu M_r x.
struct Spectrum {
  int count = 0;              // eigenvalues above shift_tol from the inertia of A_r + tol M_r
  int count_from_eigs = 0;
  int kernel_dim = 0;         // |lambda| <= kernel_tol among the computed eigenvalues
  Vec eigenvalues;            // largest computed lambda, descending
};

Spectrum eigen_count_positive(const JacobiSystem& sys, double shift_tol = 1e-6, int k = 10,
                              double kernel_tol = 1e-6);

struct SpectrumCheck {
  Spectrum coarse, fine;
  bool consistent = false;    // counts agree across h and h/2
};
SpectrumCheck eigen_count_refined(const QuantumGraph& g, double h, double shift_tol = 1e-6);

// Ritz pairs of A x = mu M x closest to sigma (shift-invert subspace iteration).
struct RitzPairs {
  Vec mu;
  Mat X;  // M-orthonormal columns in reduced coordinates
};
RitzPairs shift_invert(const SpMat& A, const SpMat& M, double sigma, int k, int max_iter = 500,
                       double tol = 1e-13);

DiscreteField sample_field(const QuantumGraph& g, const JacobiSystem& sys,
                           const std::function<double(int arc, const Eigen::Vector3d& p)>& f);
Vec to_full(const JacobiSystem& sys, const DiscreteField& f);
DiscreteField from_full(const QuantumGraph& g, const JacobiSystem& sys, const Vec& x);

struct FieldResidual {
  double interior = 0.0;   // max |(A f + M g)_k| / mass_k over interior nodes
  double vertex = 0.0;     // max |Z^T (A f + M g)| over vertex dofs
  double kirchhoff = 0.0;  // max |f_uv + f_vw - f_uw| at vertices
};

// Residual of L_Jac f = target with the conformal vertex conditions.
FieldResidual jacobi_residual(const QuantumGraph& g, const JacobiSystem& sys, const DiscreteField& f,
                              const DiscreteField& target);

// sum_ij (int f_ij) e_ij in normalized measure (trapezoid rule).
Vec volume_derivative(const QuantumGraph& g, const JacobiSystem& sys, const DiscreteField& f);

struct ConformalJacobiResult {
  DiscreteField f;
  Vec delta_V;               // column of the discrete F
  double index_form = 0.0;   // Q(f) / |S^2|
  double projected_rhs = 0.0;  // norm of the kernel component removed from the right side
  int kernel_used = 0;
};

ConformalJacobiResult conformal_jacobi_solve(const QuantumGraph& g, const JacobiSystem& sys, const Vec& a);

// Discrete F: columns delta_V(f^b) for an orthonormal basis b of E^{(q-1)}.
Mat discrete_F(const QuantumGraph& g, const JacobiSystem& sys);

}  // namespace bubblelab
