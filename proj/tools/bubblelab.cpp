#include "bubblelab/deform.hpp"
#include "bubblelab/io.hpp"
#include "bubblelab/measure.hpp"
#include "bubblelab/operators.hpp"
#include "bubblelab/plateau.hpp"
#include "bubblelab/quantum_graph.hpp"
#include "bubblelab/standard.hpp"
#include "bubblelab/suites.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>

using namespace bubblelab;
using io::json;

namespace {

struct Common {
  std::uint64_t seed = 1;
  long long samples = 1000000;
  int workers = 0;
  std::string out = "-";
};

void add_common(CLI::App* c, Common& o, bool sampling = true) {
  if (sampling) {
    c->add_option("--seed", o.seed, "RNG seed (recorded in the report)")->capture_default_str();
    c->add_option("--samples", o.samples, "Monte Carlo samples per quantity")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--workers", o.workers, "worker threads (0: BUBBLELAB_WORKERS or hardware)")->capture_default_str();
  }
  c->add_option("--out", o.out, "output path, '-' for stdout")->capture_default_str();
}

McConfig mc_of(const Common& o) {
  McConfig mc;
  mc.samples = o.samples;
  mc.seed = o.seed;
  mc.workers = o.workers;
  return mc;
}

ClusterParams load(const std::string& path, json& rep) {
  std::vector<std::string> warnings;
  ClusterParams P = io::load_cluster(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (!warnings.empty()) rep["warnings"] = warnings;
  rep["input"] = path;
  return P;
}

DetectConfig detect_of(const Common& o) {
  DetectConfig d;
  d.seed = o.seed;
  return d;
}

// ---- standard -------------------------------------------------------------

struct StandardOpts {
  int n = 2, q = 3;
  std::vector<double> volumes, curvatures;
  std::string backend = "auto";
};

VolumeBackend parse_volume_backend(const std::string& s) {
  if (s == "exact") return VolumeBackend::exact_s2;
  if (s == "projected") return VolumeBackend::projected;
  if (s == "mc") return VolumeBackend::monte_carlo;
  return VolumeBackend::automatic;
}

int run_standard(const StandardOpts& s, const Common& o) {
  json rep = io::envelope("standard", o.seed);
  ClusterParams P;
  if (!s.volumes.empty()) {
    NewtonConfig nc;
    nc.backend = parse_volume_backend(s.backend);
    nc.mc_samples = o.samples;
    nc.seed = o.seed;
    const Vec v = Eigen::Map<const Vec>(s.volumes.data(), static_cast<Eigen::Index>(s.volumes.size()));
    const StandardSolve sol = standard_of_volume(s.n, s.q, v, nc);
    P = sol.params;
    rep["newton"] = {{"iterations", sol.iterations}, {"residual", sol.residual},
                     {"backend", backend_name(resolve_backend(s.n, s.q, nc.backend))}};
  } else if (!s.curvatures.empty()) {
    P = standard_of_curvature(s.n, s.q,
                              Eigen::Map<const Vec>(s.curvatures.data(), static_cast<Eigen::Index>(s.curvatures.size())));
  } else {
    P = equal_volume_standard(s.n, s.q);
  }
  json c = io::cluster_to_json(P);
  for (auto it = rep.begin(); it != rep.end(); ++it) c[it.key()] = it.value();
  io::write_json(o.out, c);
  return 0;
}

// ---- measure --------------------------------------------------------------

int run_measure(const std::string& in, const std::string& backend, const std::string& areas_csv, bool raw,
                const Common& o) {
  json rep = io::envelope("measure", o.seed);
  const ClusterParams P = load(in, rep);
  const InterfaceGraph g = detect_interfaces(P, detect_of(o));
  MeasureReport m;
  if (backend == "exact") m = measure_exact_s2(P);
  else if (backend == "projected") m = measure_projected(P);
  else if (backend == "mc") m = measure_mc(P, g, mc_of(o));
  else m = measure_auto(P, g, mc_of(o));
  if (raw) m = raw_measure(m, P.n);
  rep["interfaces"] = io::graph_json(g);
  rep["measure"] = io::measure_json(m);
  rep["spherical"] = validate_spherical(P, g).passes;
  io::write_json(o.out, rep);
  if (!areas_csv.empty()) {
    io::CsvRow header;
    for (int j = 0; j < P.q; ++j) header.push_back("cell" + std::to_string(j));
    std::vector<io::CsvRow> rows;
    for (int i = 0; i < P.q; ++i) {
      io::CsvRow r;
      for (int j = 0; j < P.q; ++j) r.push_back(io::fmt(m.areas(i, j)));
      rows.push_back(r);
    }
    io::write_csv(areas_csv, header, rows);
  }
  return 0;
}

// ---- deform ---------------------------------------------------------------

int run_deform(const std::string& in, const std::string& mode, double t_end, int steps, bool check,
               const std::string& csv, const Common& o) {
  json rep = io::envelope("deform " + mode, o.seed);
  const ClusterParams P = load(in, rep);
  json path = json::array();
  if (mode == "conformal") {
    const auto N = perpendicular_pole(P);
    if (!N) throw DomainError("conformal deformation needs a perpendicular cluster");
    rep["pole"] = io::vec_json(*N);
    for (int s = 0; s <= steps; ++s) {
      const double t = t_end * s / steps;
      const ClusterParams Pt = conformal_step(P, *N, t);
      json e{{"t", t}, {"cluster", io::cluster_to_json(Pt)}};
      if (t != 0.0) {
        const PcfFit fit = pcf_fit(Pt);
        e["xi"] = io::vec_json(fit.xi);
        e["pcf_residual"] = fit.residual;
      }
      path.push_back(e);
    }
  } else {
    const GramFactor f = gram_factor(P);
    for (int s = 0; s <= steps; ++s) {
      const double t = t_end * s / steps;
      path.push_back({{"t", t}, {"cluster", io::cluster_to_json(gram_path(P, f, t))}});
    }
    if (check) {
      GramCheckConfig gc;
      gc.mc = mc_of(o);
      gc.detect = detect_of(o);
      const GramInvarianceReport r = gram_invariance_check(P, t_end, steps, gc);
      rep["invariance"] = {{"backend", r.backend},
                           {"precondition_ok", r.precondition_ok},
                           {"precondition_failures", r.precondition_failures},
                           {"first_new_interface", r.first_new_interface ? json(*r.first_new_interface) : json(nullptr)},
                           {"max_volume_dev", r.max_volume_dev},
                           {"max_perimeter_dev", r.max_perimeter_dev},
                           {"max_dev_sigma", r.max_dev_sigma}};
      if (!csv.empty()) {
        std::vector<io::CsvRow> rows;
        for (const GramStep& s : r.steps)
          rows.push_back({io::fmt(s.t), io::fmt(s.max_volume_dev), io::fmt(s.volume_dev_sigma), io::fmt(s.perimeter),
                          io::fmt(s.perimeter_dev), io::fmt(s.perimeter_dev_sigma), io::fmt(s.lambda_min),
                          s.new_interface ? "1" : "0"});
        io::write_csv(csv, {"t", "max_volume_dev", "volume_dev_sigma", "perimeter", "perimeter_dev",
                            "perimeter_dev_sigma", "lambda_min", "new_interface"},
                      rows);
      }
    }
  }
  rep["path"] = path;
  io::write_json(o.out, rep);
  return 0;
}

// ---- operators ------------------------------------------------------------

int run_operators(const std::string& in, const std::vector<std::string>& checks, const std::string& backend,
                  const Common& o) {
  json rep = io::envelope("operators", o.seed);
  const ClusterParams P = load(in, rep);
  const InterfaceGraph g = detect_interfaces(P, detect_of(o));
  IntegrationConfig ic = default_integration(P, mc_of(o));
  if (backend == "mc") ic.backend = IntegrationBackend::monte_carlo;
  if (backend == "exact") ic.backend = IntegrationBackend::exact_s2;
  rep["backend"] = ic.backend == IntegrationBackend::exact_s2 ? "exact_s2" : "monte_carlo";
  const std::set<std::string> want(checks.begin(), checks.end());

  const auto fit = pcf_detect(P);
  const auto N = perpendicular_pole(P);
  rep["pcf"] = fit ? json{{"xi", io::vec_json(fit->xi)}, {"residual", fit->residual},
                          {"conformally_flat", fit->conformally_flat}}
                   : json(nullptr);
  rep["pole"] = N ? io::vec_json(*N) : json(nullptr);
  rep["C"] = io::mat_json(op_C(P).matrix);
  if (!fit) rep["note"] = "cluster is not PCF: F is not available in closed form; only F0 is assembled";

  auto block = [&](const PointWeight& w, const SimplexOperator& F, const std::string& name) {
    json b{{"matrix", io::mat_json(F.matrix)}};
    if (want.count("fc_n")) {
      const MatrixEstimate e = fc_minus_n(P, g, w, ic);
      b["fc_minus_n"] = {{"max_abs", e.max_abs()}, {"max_sigma", e.max_sigma()}};
    }
    if (want.count("trace")) {
      const Estimate e = trace_residual(P, g, w, ic);
      b["trace_residual"] = {{"value", e.value}, {"stderr", e.stderr_}};
    }
    if (want.count("locality")) {
      const LocalityReport lr = locality_probe(F, g);
      b["locality"] = {{"max_empty", lr.max_empty}, {"coefficients", io::mat_json(lr.coeff)}};
    }
    const Estimate lm = lambda_min_estimate(F);
    b["lambda_min"] = {{"value", lm.value}, {"stderr", lm.stderr_}};
    rep[name] = b;
  };
  if (fit) block(psi_weight(fit->xi), op_F_pcf(P, g, fit->xi, ic), "F");
  if (N) block(f0_weight(*N, P.n), op_F0(P, g, *N, ic), "F0");
  io::write_json(o.out, rep);
  return 0;
}

// ---- plateau --------------------------------------------------------------

int run_plateau(const std::string& in, int budget, const Common& o) {
  json rep = io::envelope("plateau", o.seed);
  const ClusterParams P = load(in, rep);
  const InterfaceGraph g = detect_interfaces(P, detect_of(o));
  const PlateauReport pr = certify_plateau(P, g, budget, o.seed);
  json pts = json::array();
  for (const auto& p : pr.points)
    pts.push_back({{"point", io::vec_json(p.p)}, {"incidence", p.incidence}, {"affine_rank", p.affine_rank},
                   {"plateau", p.plateau}, {"gram_residual", p.gram_residual}});
  json tps = json::array();
  for (const auto& t : triple_point_checks(P, pr))
    tps.push_back({{"point", io::vec_json(t.p)}, {"cells", {t.u, t.v, t.w}}, {"normal_sum", t.normal_sum},
                   {"max_angle_error_deg", t.max_angle_error_deg}});
  const Q3Report q3 = classify_q3(P, pr, pcf_detect(P));
  rep["budget"] = budget;
  rep["plateau_up_to"] = pr.plateau_up_to;
  rep["fully_plateau"] = pr.fully_plateau;
  rep["arank_C"] = pr.arank_C;
  rep["points"] = pts;
  rep["triple_points"] = tps;
  rep["interface_points"] = pr.interface_points;
  rep["max_interface_normal_error"] = pr.max_interface_normal_error;
  rep["q3_class"] = q3_name(q3.cls);
  rep["q3_plateau"] = q3.q3_plateau;
  if (!pr.note.empty()) rep["note"] = pr.note;
  if (q3.contradiction) rep["contradiction"] = q3.note;
  io::write_json(o.out, rep);
  return q3.contradiction ? 1 : 0;
}

// ---- spectrum -------------------------------------------------------------

int run_spectrum(const std::string& in, double h, const Common& o) {
  json rep = io::envelope("spectrum", o.seed);
  const ClusterParams P = load(in, rep);
  const QuantumGraph g = build_graph(P, detect_interfaces(P, detect_of(o)));
  const SpectrumCheck sc = eigen_count_refined(g, h);
  json arcs = json::array();
  for (const auto& a : g.arcs)
    arcs.push_back({{"pair", {a.i, a.j}}, {"kappa", a.kappa}, {"length", a.length}, {"periodic", a.periodic},
                    {"robin", {a.robin_start, a.robin_end}}});
  auto spec = [&](const Spectrum& s, double hh) {
    return json{{"h", hh}, {"count", s.count}, {"count_from_eigs", s.count_from_eigs}, {"kernel_dim", s.kernel_dim},
                {"eigenvalues", io::vec_json(s.eigenvalues)}};
  };
  rep["arcs"] = arcs;
  rep["vertices"] = g.vertices.size();
  rep["coarse"] = spec(sc.coarse, h);
  rep["fine"] = spec(sc.fine, h / 2);
  rep["consistent"] = sc.consistent;
  rep["expected_count"] = P.q - 1;
  if (!sc.consistent) rep["note"] = "inconclusive: counts differ between h and h/2";
  io::write_json(o.out, rep);
  return sc.consistent ? 0 : 2;
}

// ---- profile --------------------------------------------------------------

int run_profile(int n, int q, int grid, const std::string& backend, const Common& o) {
  if (grid < 2) throw DomainError("grid must be at least 2");
  std::vector<Vec> pts;
  // interior lattice points of the simplex with denominator grid
  std::vector<int> c(q, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == q - 1) {
      c[i] = left;
      if (*std::min_element(c.begin(), c.end()) > 0) {
        Vec v(q);
        for (int j = 0; j < q; ++j) v(j) = static_cast<double>(c[j]) / grid;
        pts.push_back(v);
      }
      return;
    }
    for (int a = 1; a <= left; ++a) {
      c[i] = a;
      rec(i + 1, left - a);
    }
  };
  rec(0, grid);
  ProfileConfig pc;
  pc.newton.backend = parse_volume_backend(backend);
  pc.newton.mc_samples = o.samples;
  pc.newton.seed = o.seed;
  std::vector<io::CsvRow> rows;
  for (const Vec& v : pts) {
    io::CsvRow r;
    for (int j = 0; j < q; ++j) r.push_back(io::fmt(v(j)));
    try {
      const ModelProfilePoint pt = model_profile(n, q, v, pc);
      r.push_back(io::fmt(pt.I_m));
      r.push_back(io::fmt((pt.grad - (n - 1) * pt.kappa).cwiseAbs().maxCoeff()));
      try {
        r.push_back(io::fmt(pde_residual(pt, n)));
      } catch (const HessianError&) {
        r.push_back("nan");
      }
      r.push_back(pt.backend);
    } catch (const std::exception& e) {
      std::cerr << "warning: v = " << v.transpose() << ": " << e.what() << "\n";
      r.insert(r.end(), {"nan", "nan", "nan", "error"});
    }
    rows.push_back(r);
  }
  io::CsvRow header;
  for (int j = 0; j < q; ++j) header.push_back("v" + std::to_string(j));
  header.insert(header.end(), {"I_m", "grad_error", "pde_residual", "backend"});
  io::write_csv(o.out, header, rows);
  return 0;
}

// ---- suite ----------------------------------------------------------------

int run_suites(const std::string& name, double warn, double fail, const Common& o) {
  SuiteConfig cfg;
  cfg.seed = o.seed;
  cfg.samples = o.samples;
  cfg.workers = o.workers;
  cfg.sigma.warn = warn;
  cfg.sigma.fail = fail;
  std::vector<std::string> names = name == "all" ? suite_names() : std::vector<std::string>{name};
  json reports = json::array();
  int rc = 0;
  for (const auto& s : names) {
    const SuiteResult r = run_suite(s, cfg);
    std::cerr << status_name(r.status) << "  " << r.name << "  " << r.summary << "\n";
    if (r.status == Status::fail) rc = 1;
    reports.push_back(suite_json(r, cfg));
  }
  io::write_json(o.out, names.size() == 1 ? reports[0] : json{{"schema_version", io::kSchemaVersion},
                                                              {"version", io::version()},
                                                              {"seed", o.seed},
                                                              {"suites", reports}});
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubblelab: spherical Voronoi clusters on S^n"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::version());

  Common common;

  StandardOpts so;
  auto* std_cmd = app.add_subcommand("standard", "construct a standard bubble");
  std_cmd->add_option("--n", so.n, "sphere dimension")->required();
  std_cmd->add_option("--q", so.q, "number of cells")->required();
  std_cmd->add_option("--volumes", so.volumes, "target volumes v1,..,vq (normalized)")->delimiter(',');
  std_cmd->add_option("--curvatures", so.curvatures, "curvature vector k1,..,kq")->delimiter(',');
  std_cmd->add_option("--backend", so.backend, "volume backend for --volumes")
      ->check(CLI::IsMember({"auto", "exact", "projected", "mc"}))->capture_default_str();
  add_common(std_cmd, common);

  std::string input, backend = "auto", areas_csv;
  bool raw = false;
  auto* meas = app.add_subcommand("measure", "cell volumes and interface areas");
  meas->add_option("cluster", input, "cluster JSON")->required()->check(CLI::ExistingFile);
  meas->add_option("--backend", backend)->check(CLI::IsMember({"auto", "mc", "exact", "projected"}))->capture_default_str();
  meas->add_option("--areas-csv", areas_csv, "write the areas matrix as CSV");
  meas->add_flag("--raw", raw, "unnormalized measure");
  add_common(meas, common);

  std::string mode = "conformal", csv;
  double t_end = 1.0;
  int steps = 10;
  bool check = false;
  auto* def = app.add_subcommand("deform", "conformal or Gram perturbation paths");
  def->add_option("cluster", input, "cluster JSON")->required()->check(CLI::ExistingFile);
  def->add_option("--mode", mode)->check(CLI::IsMember({"conformal", "gram"}))->capture_default_str();
  def->add_option("--t", t_end, "final time")->capture_default_str();
  def->add_option("--steps", steps, "grid intervals")->capture_default_str()->check(CLI::PositiveNumber);
  def->add_flag("--check-invariance", check, "measure V and A along the Gram path");
  def->add_option("--csv", csv, "invariance report as CSV");
  add_common(def, common);

  std::vector<std::string> checks = {"fc_n", "trace", "locality"};
  auto* ops = app.add_subcommand("operators", "C, N, F, F0 and their identities");
  ops->add_option("cluster", input, "cluster JSON")->required()->check(CLI::ExistingFile);
  ops->add_option("--checks", checks, "subset of fc_n,trace,locality")->delimiter(',')
      ->check(CLI::IsMember({"fc_n", "trace", "locality"}));
  ops->add_option("--backend", backend)->check(CLI::IsMember({"auto", "mc", "exact"}))->capture_default_str();
  add_common(ops, common);

  int budget = 8;
  auto* pl = app.add_subcommand("plateau", "blow-up cones and Plateau certification");
  pl->add_option("cluster", input, "cluster JSON")->required()->check(CLI::ExistingFile);
  pl->add_option("--budget", budget, "Newton seeds per incidence set")->capture_default_str();
  add_common(pl, common);

  double h = 1e-3;
  auto* sp = app.add_subcommand("spectrum", "Jacobi spectrum of an S^2 cluster");
  sp->set_help_flag("--help", "Print this help message and exit");
  sp->add_option("cluster", input, "cluster JSON")->required()->check(CLI::ExistingFile);
  sp->add_option("--h", h, "grid step (also run at h/2)")->capture_default_str();
  add_common(sp, common);

  int pn = 2, pq = 2, grid = 4;
  auto* pr = app.add_subcommand("profile", "model profile and PDE residual on a simplex grid");
  pr->add_option("--n", pn)->required();
  pr->add_option("--q", pq)->required();
  pr->add_option("--grid", grid, "denominator of the interior lattice")->capture_default_str();
  pr->add_option("--backend", backend)->check(CLI::IsMember({"auto", "exact", "projected", "mc"}))->capture_default_str();
  std::string report = "csv";
  pr->add_option("--report", report)->check(CLI::IsMember({"csv"}))->capture_default_str();
  add_common(pr, common);

  std::string suite = "all";
  double warn = 3.0, fail = 5.0;
  auto* su = app.add_subcommand("suite", "run verification suites");
  std::vector<std::string> choices = suite_names();
  choices.push_back("all");
  su->add_option("name", suite, "suite name or 'all'")->check(CLI::IsMember(choices))->capture_default_str();
  su->add_option("--warn-sigma", warn, "warn above this z-score")->capture_default_str();
  su->add_option("--fail-sigma", fail, "fail above this z-score")->capture_default_str();
  add_common(su, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*std_cmd) return run_standard(so, common);
    if (*meas) return run_measure(input, backend, areas_csv, raw, common);
    if (*def) return run_deform(input, mode, t_end, steps, check, csv, common);
    if (*ops) return run_operators(input, checks, backend, common);
    if (*pl) return run_plateau(input, budget, common);
    if (*sp) return run_spectrum(input, h, common);
    if (*pr) return run_profile(pn, pq, grid, backend, common);
    if (*su) return run_suites(suite, warn, fail, common);
  } catch (const NewtonError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
