#include "bubblelab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef BUBBLELAB_VERSION
#define BUBBLELAB_VERSION "unknown"
#endif

namespace bubblelab::io {

std::string version() { return BUBBLELAB_VERSION; }

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw DomainError("expected a numeric array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("expected a non-empty array of rows");
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != cols) throw DomainError("ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = vec_from_json(j[r]).transpose();
  }
  return m;
}

json cluster_to_json(const ClusterParams& P) {
  return json{{"n", P.n},
              {"q", P.q},
              {"quasi_centers", mat_json(P.centers)},
              {"curvatures", vec_json(P.kappa)},
              {"label", P.label}};
}

ClusterParams cluster_from_json(const json& j, std::vector<std::string>* warnings) {
  for (const char* key : {"n", "quasi_centers", "curvatures"})
    if (!j.contains(key)) throw DomainError(std::string("cluster file lacks field '") + key + "'");
  const int n = j.at("n").get<int>();
  const Mat C = mat_from_json(j.at("quasi_centers"));
  const Vec k = vec_from_json(j.at("curvatures"));
  if (j.contains("q") && j.at("q").get<int>() != C.rows())
    throw DomainError("field q disagrees with the number of quasi-centers");
  double corr = 0.0;
  ClusterParams P = make_cluster(n, C, k, j.value("label", std::string{}), &corr);
  if (corr > 1e-9 && warnings) {
    std::ostringstream os;
    os << "sum conventions restored on load (largest correction " << corr << ")";
    warnings->push_back(os.str());
  }
  return P;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ClusterParams load_cluster(const std::string& path, std::vector<std::string>* warnings) {
  return cluster_from_json(read_json(path), warnings);
}

void write_json(const std::string& path, const json& j) {
  if (path == "-") {
    std::fputs((j.dump(2) + "\n").c_str(), stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

json graph_json(const InterfaceGraph& g) {
  json pairs = json::array();
  for (auto [i, j] : g.pairs()) pairs.push_back({i, j});
  json w = json::array();
  for (const auto& [ij, p] : g.witness) w.push_back({{"pair", {ij.first, ij.second}}, {"point", vec_json(p)}});
  return json{{"q", g.q},
              {"nonempty_pairs", pairs},
              {"witnesses", w},
              {"affine_only", g.affine_only},
              {"diagnostics", g.diagnostics}};
}

json measure_json(const MeasureReport& m) {
  return json{{"backend", m.backend},
              {"seed", m.seed},
              {"samples", m.samples},
              {"normalized", m.normalized},
              {"volumes", vec_json(m.volumes)},
              {"volume_stderr", vec_json(m.volume_stderr)},
              {"areas", mat_json(m.areas)},
              {"area_stderr", mat_json(m.area_stderr)},
              {"total_perimeter", m.total_perimeter},
              {"perimeter_stderr", m.perimeter_stderr}};
}

json envelope(const std::string& command, std::uint64_t seed) {
  return json{{"schema_version", kSchemaVersion}, {"version", version()}, {"command", command}, {"seed", seed}};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows) {
  std::ostringstream os;
  auto line = [&](const CsvRow& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (path == "-") {
    std::fputs(os.str().c_str(), stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << os.str();
}

std::string matrix_csv(const Mat& m) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << fmt(m(r, c));
    os << "\n";
  }
  return os.str();
}

}  // namespace bubblelab::io
