#include "bubblelab/quantum_graph.hpp"

#include "bubblelab/sampling.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace bubblelab {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

int slot_of(const std::array<int, 3>& c, int i, int j) {
  if (i == c[0] && j == c[1]) return 0;
  if (i == c[1] && j == c[2]) return 1;
  if (i == c[0] && j == c[2]) return 2;
  return -1;
}

int node_count(const QgArc& a, int m) { return a.periodic ? m : m + 1; }

}  // namespace

QuantumGraph build_graph(const ClusterParams& P, const InterfaceGraph& graph) {
  if (P.n != 2) throw DomainError("the quantum graph is only built on S^2 (n = 2)");
  const S2Arrangement arr = build_arrangement_s2(P);
  QuantumGraph g;
  g.params = P;
  for (const CircleArc& c : arr.arcs) {
    QgArc a;
    a.i = c.i;
    a.j = c.j;
    a.kappa = P.kij(c.i, c.j);
    a.length = c.length();
    a.periodic = c.full_circle;
    a.geom = c;
    g.arcs.push_back(a);
    if (graph.q == P.q && !graph.has(c.i, c.j)) {
      std::ostringstream os;
      os << "arc on pair (" << c.i << "," << c.j << ") which the interface graph marks empty";
      g.diagnostics.push_back(os.str());
    }
  }
  for (const ArcVertex& av : arr.vertices) {
    if (av.cells.size() != 3 || av.arc_ends.size() != 3) {
      std::ostringstream os;
      os << "boundary vertex with " << av.cells.size() << " cells and " << av.arc_ends.size()
         << " arc ends is not a triple point";
      throw DomainError(os.str());
    }
    QgVertex v;
    v.p = av.p;
    for (int k = 0; k < 3; ++k) v.cells[k] = av.cells[k];
    std::sort(v.cells.begin(), v.cells.end());
    std::array<char, 3> seen{};
    for (auto [ai, e] : av.arc_ends) {
      QgArc& a = g.arcs[ai];
      const int s = slot_of(v.cells, a.i, a.j);
      if (s < 0 || seen[s]) throw DomainError("triple point with inconsistent incident arcs");
      seen[s] = 1;
      v.arc[s] = ai;
      v.end[s] = e;
      const int k = v.cells[0] + v.cells[1] + v.cells[2] - a.i - a.j;
      const double robin = (P.kij(a.i, k) + P.kij(a.j, k)) / std::sqrt(3.0);
      const int vid = static_cast<int>(g.vertices.size());
      if (e == 0) {
        a.v_start = vid;
        a.robin_start = robin;
      } else {
        a.v_end = vid;
        a.robin_end = robin;
      }
    }
    g.vertices.push_back(v);
  }
  for (const QgArc& a : g.arcs)
    if (!a.periodic && (a.v_start < 0 || a.v_end < 0))
      throw DomainError("open arc without vertices at both ends");
  return g;
}

JacobiSystem assemble_jacobi(const QuantumGraph& g, double h) {
  if (!(h > 0)) throw DomainError("grid step must be positive");
  JacobiSystem S;
  S.h = h;
  const int na = static_cast<int>(g.arcs.size());
  S.cells.resize(na);
  S.step.resize(na);
  S.offset.resize(na);
  int total = 0;
  for (int a = 0; a < na; ++a) {
    const QgArc& arc = g.arcs[a];
    const int m = static_cast<int>(std::ceil(arc.length / h - 1e-9));
    if (m < 16) {
      std::ostringstream os;
      os << "grid step " << h << " is too coarse for an arc of length " << arc.length;
      throw DomainError(os.str());
    }
    S.cells[a] = m;
    S.step[a] = arc.length / m;
    S.offset[a] = total;
    total += node_count(arc, m);
  }
  S.full_size = total;
  S.mass = Vec::Zero(total);

  std::vector<Eigen::Triplet<double>> tA;
  for (int a = 0; a < na; ++a) {
    const QgArc& arc = g.arcs[a];
    const int m = S.cells[a];
    const int nn = node_count(arc, m);
    const double st = S.step[a];
    const double pot = 1.0 + arc.kappa * arc.kappa;
    for (int e = 0; e < m; ++e) {
      const int k0 = S.offset[a] + e;
      const int k1 = S.offset[a] + (e + 1) % nn;
      tA.emplace_back(k0, k0, 1.0 / st);
      tA.emplace_back(k1, k1, 1.0 / st);
      tA.emplace_back(k0, k1, -1.0 / st);
      tA.emplace_back(k1, k0, -1.0 / st);
      S.mass(k0) += 0.5 * st;
      S.mass(k1) += 0.5 * st;
    }
    for (int k = 0; k < nn; ++k)
      tA.emplace_back(S.offset[a] + k, S.offset[a] + k, -pot * S.mass(S.offset[a] + k));
    if (!arc.periodic) {
      tA.emplace_back(S.offset[a], S.offset[a], -arc.robin_start);
      tA.emplace_back(S.offset[a] + m, S.offset[a] + m, -arc.robin_end);
    }
  }
  S.A.resize(total, total);
  S.A.setFromTriplets(tA.begin(), tA.end());

  // reduced coordinates: free interior nodes, two dofs per vertex
  std::vector<Eigen::Triplet<double>> tZ;
  int dof = 0;
  for (int a = 0; a < na; ++a) {
    const QgArc& arc = g.arcs[a];
    const int nn = node_count(arc, S.cells[a]);
    const int lo = arc.periodic ? 0 : 1;
    const int hi = arc.periodic ? nn : nn - 1;
    for (int k = lo; k < hi; ++k) {
      tZ.emplace_back(S.offset[a] + k, dof++, 1.0);
      S.is_vertex_row.push_back(0);
    }
  }
  auto end_node = [&](const QgVertex& v, int s) {
    const int a = v.arc[s];
    return S.offset[a] + (v.end[s] == 0 ? 0 : S.cells[a]);
  };
  for (const QgVertex& v : g.vertices) {
    S.vertex_dof.push_back(dof);
    // f_uv = x, f_vw = y, f_uw = x + y
    tZ.emplace_back(end_node(v, 0), dof, 1.0);
    tZ.emplace_back(end_node(v, 2), dof, 1.0);
    tZ.emplace_back(end_node(v, 1), dof + 1, 1.0);
    tZ.emplace_back(end_node(v, 2), dof + 1, 1.0);
    S.is_vertex_row.push_back(1);
    S.is_vertex_row.push_back(1);
    dof += 2;
  }
  S.Z.resize(total, dof);
  S.Z.setFromTriplets(tZ.begin(), tZ.end());
  SpMat Md(total, total);
  Md.reserve(Eigen::VectorXi::Ones(total));
  for (int k = 0; k < total; ++k) Md.insert(k, k) = S.mass(k);
  S.Ar = SpMat(S.Z.transpose() * S.A * S.Z);
  S.Mr = SpMat(S.Z.transpose() * Md * S.Z);
  return S;
}

RitzPairs shift_invert(const SpMat& A, const SpMat& M, double sigma, int k, int max_iter, double tol) {
  const int n = static_cast<int>(A.rows());
  k = std::min(k, n);
  const int p = std::min(n, k + 8);
  const SpMat K = A - sigma * M;
  Eigen::SimplicialLDLT<SpMat> solver(K);
  if (solver.info() != Eigen::Success) throw std::runtime_error("shifted factorization failed");

  Mat X(n, p);
  for (int c = 0; c < p; ++c) {
    CounterRng rng(99, stream_id(41), static_cast<std::uint64_t>(c));
    X.col(c) = rng.normal_vec(n);
  }
  Vec prev = Vec::Constant(p, std::numeric_limits<double>::infinity());
  RitzPairs out;
  Vec theta;
  for (int it = 0; it < max_iter; ++it) {
    Mat Y = solver.solve(Mat(M * X));
    for (int c = 0; c < p; ++c) Y.col(c).normalize();
    const Mat Ka = Y.transpose() * (K * Y);
    const Mat Mb = Y.transpose() * (M * Y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(0.5 * (Ka + Ka.transpose()),
                                                     0.5 * (Mb + Mb.transpose()));
    theta = ges.eigenvalues();
    std::vector<int> idx(p);
    for (int c = 0; c < p; ++c) idx[c] = c;
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return std::abs(theta(x)) < std::abs(theta(y)); });
    Mat V(p, p);
    Vec th(p);
    for (int c = 0; c < p; ++c) {
      V.col(c) = ges.eigenvectors().col(idx[c]);
      th(c) = theta(idx[c]);
    }
    X = Y * V;
    theta = th;
    double change = 0.0;
    for (int c = 0; c < k; ++c)
      change = std::max(change, std::abs(theta(c) - prev(c)) / std::max(1.0, std::abs(theta(c))));
    prev = theta;
    if (change < tol && it > 2) break;
  }
  out.mu = (theta.head(k).array() + sigma).matrix();
  out.X = X.leftCols(k);
  return out;
}

namespace {

int negative_pivots(const SpMat& K) {
  Eigen::SimplicialLDLT<SpMat> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("LDLT factorization failed");
  const Vec D = ldlt.vectorD();
  return static_cast<int>((D.array() < 0.0).count());
}

RitzPairs kernel_pairs(const JacobiSystem& sys, double tol) {
  RitzPairs rp = shift_invert(sys.Ar, sys.Mr, -1e-3, 6, 200, 1e-14);
  std::vector<int> keep;
  for (int c = 0; c < rp.mu.size(); ++c)
    if (std::abs(rp.mu(c)) <= tol) keep.push_back(c);
  RitzPairs out;
  out.mu = Vec(keep.size());
  out.X = Mat(rp.X.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.mu(c) = rp.mu(keep[c]);
    out.X.col(c) = rp.X.col(keep[c]);
  }
  return out;
}

}  // namespace

Spectrum eigen_count_positive(const JacobiSystem& sys, double shift_tol, int k, double kernel_tol) {
  Spectrum sp;
  sp.count = negative_pivots(SpMat(sys.Ar + shift_tol * sys.Mr));
  double s = 2.0;
  for (int tries = 0; tries < 40; ++tries) {
    if (negative_pivots(SpMat(sys.Ar + s * sys.Mr)) == 0) break;
    s *= 2.0;
  }
  const RitzPairs rp = shift_invert(sys.Ar, sys.Mr, -s, k);
  Vec lam = -rp.mu;
  std::sort(lam.data(), lam.data() + lam.size(), std::greater<double>());
  sp.eigenvalues = lam;
  for (int c = 0; c < lam.size(); ++c) {
    if (lam(c) > shift_tol) ++sp.count_from_eigs;
    if (std::abs(lam(c)) <= kernel_tol) ++sp.kernel_dim;
  }
  return sp;
}

SpectrumCheck eigen_count_refined(const QuantumGraph& g, double h, double shift_tol) {
  SpectrumCheck c;
  c.coarse = eigen_count_positive(assemble_jacobi(g, h), shift_tol);
  c.fine = eigen_count_positive(assemble_jacobi(g, 0.5 * h), shift_tol);
  c.consistent = c.coarse.count == c.fine.count && c.coarse.count == c.coarse.count_from_eigs &&
                 c.fine.count == c.fine.count_from_eigs;
  return c;
}

DiscreteField sample_field(const QuantumGraph& g, const JacobiSystem& sys,
                           const std::function<double(int, const Eigen::Vector3d&)>& f) {
  DiscreteField out;
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    const int nn = node_count(g.arcs[a], sys.cells[a]);
    Vec v(nn);
    for (int k = 0; k < nn; ++k) v(k) = f(static_cast<int>(a), g.arcs[a].geom.at(k * sys.step[a]));
    out.values.push_back(v);
  }
  return out;
}

Vec to_full(const JacobiSystem& sys, const DiscreteField& f) {
  Vec x(sys.full_size);
  for (std::size_t a = 0; a < f.values.size(); ++a) x.segment(sys.offset[a], f.values[a].size()) = f.values[a];
  return x;
}

DiscreteField from_full(const QuantumGraph& g, const JacobiSystem& sys, const Vec& x) {
  DiscreteField out;
  for (std::size_t a = 0; a < g.arcs.size(); ++a)
    out.values.push_back(x.segment(sys.offset[a], node_count(g.arcs[a], sys.cells[a])));
  return out;
}

FieldResidual jacobi_residual(const QuantumGraph& g, const JacobiSystem& sys, const DiscreteField& f,
                              const DiscreteField& target) {
  FieldResidual r;
  const Vec x = to_full(sys, f);
  const Vec res = sys.A * x + sys.mass.cwiseProduct(to_full(sys, target));
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    const int nn = node_count(g.arcs[a], sys.cells[a]);
    const int lo = g.arcs[a].periodic ? 0 : 1;
    const int hi = g.arcs[a].periodic ? nn : nn - 1;
    for (int k = lo; k < hi; ++k) {
      const int idx = sys.offset[a] + k;
      r.interior = std::max(r.interior, std::abs(res(idx)) / sys.mass(idx));
    }
  }
  const Vec rr = sys.Z.transpose() * res;
  for (int d = 0; d < rr.size(); ++d)
    if (sys.is_vertex_row[d]) r.vertex = std::max(r.vertex, std::abs(rr(d)));
  for (const QgVertex& v : g.vertices) {
    auto val = [&](int s) {
      const Vec& arr = f.values[v.arc[s]];
      return v.end[s] == 0 ? arr(0) : arr(arr.size() - 1);
    };
    r.kirchhoff = std::max(r.kirchhoff, std::abs(val(0) + val(1) - val(2)));
  }
  return r;
}

Vec volume_derivative(const QuantumGraph& g, const JacobiSystem& sys, const DiscreteField& f) {
  Vec dv = Vec::Zero(g.params.q);
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    const Vec& v = f.values[a];
    double integral = v.sum();
    if (!g.arcs[a].periodic) integral -= 0.5 * (v(0) + v(v.size() - 1));
    integral *= sys.step[a];
    dv(g.arcs[a].i) += integral;
    dv(g.arcs[a].j) -= integral;
  }
  return dv / kFourPi;
}

namespace {

ConformalJacobiResult solve_with_kernel(const QuantumGraph& g, const JacobiSystem& sys, const Vec& a_in,
                                        const RitzPairs& ker,
                                        const Eigen::SimplicialLDLT<SpMat>& solver) {
  const int n = g.params.n;
  const Vec a = a_in.array() - a_in.mean();
  const DiscreteField target = sample_field(g, sys, [&](int arc, const Eigen::Vector3d&) {
    return (n - 1) * (a(g.arcs[arc].i) - a(g.arcs[arc].j));
  });
  Vec b = -(sys.Z.transpose() * sys.mass.cwiseProduct(to_full(sys, target)));
  ConformalJacobiResult r;
  r.kernel_used = static_cast<int>(ker.X.cols());
  if (r.kernel_used > 0) {
    const Vec comp = ker.X.transpose() * b;
    r.projected_rhs = comp.norm() / std::max(b.norm(), 1e-300);
    b -= sys.Mr * (ker.X * comp);
  }
  Vec x = solver.solve(b);
  if (r.kernel_used > 0) x -= ker.X * (ker.X.transpose() * (sys.Mr * x));
  r.f = from_full(g, sys, sys.Z * x);
  r.delta_V = volume_derivative(g, sys, r.f);
  r.index_form = x.dot(sys.Ar * x) / kFourPi;
  return r;
}

}  // namespace

ConformalJacobiResult conformal_jacobi_solve(const QuantumGraph& g, const JacobiSystem& sys, const Vec& a) {
  if (a.size() != g.params.q) throw DomainError("a must have length q");
  const RitzPairs ker = kernel_pairs(sys, 1e-4);
  Eigen::SimplicialLDLT<SpMat> solver(sys.Ar);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Jacobi factorization failed");
  return solve_with_kernel(g, sys, a, ker, solver);
}

Mat discrete_F(const QuantumGraph& g, const JacobiSystem& sys) {
  const int q = g.params.q;
  const Mat B = simplex_basis(q);
  const RitzPairs ker = kernel_pairs(sys, 1e-4);
  Eigen::SimplicialLDLT<SpMat> solver(sys.Ar);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Jacobi factorization failed");
  Mat DV(q, q - 1);
  for (int k = 0; k < q - 1; ++k) DV.col(k) = solve_with_kernel(g, sys, B.col(k), ker, solver).delta_V;
  return DV * B.transpose();
}

}  // namespace bubblelab
