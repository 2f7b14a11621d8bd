#pragma once

#include "bubblelab/core.hpp"
#include "bubblelab/measure.hpp"

#include <json.hpp>

namespace bubblelab::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

std::string version();

json vec_json(const Vec& v);
json mat_json(const Mat& m);
Vec vec_from_json(const json& j);
Mat mat_from_json(const json& j);

json cluster_to_json(const ClusterParams& P);
// Sum conventions are restored on load; a warning is appended when the
// correction exceeds 1e-9.
ClusterParams cluster_from_json(const json& j, std::vector<std::string>* warnings = nullptr);
ClusterParams load_cluster(const std::string& path, std::vector<std::string>* warnings = nullptr);

json graph_json(const InterfaceGraph& g);
json measure_json(const MeasureReport& m);

// Common header of every report.
json envelope(const std::string& command, std::uint64_t seed);

json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);

using CsvRow = std::vector<std::string>;
void write_csv(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows);
std::string fmt(double x);
std::string matrix_csv(const Mat& m);

}  // namespace bubblelab::io
