#pragma once

#include "bubblelab/io.hpp"

#include <limits>

namespace bubblelab {

enum class Status { pass, warn, fail };
std::string status_name(Status s);

// A stochastic check with z-score z fails when z > fail and warns when z > warn.
struct SigmaPolicy {
  double fail = 4.0;
  double warn = std::numeric_limits<double>::infinity();
};

struct SuiteConfig {
  std::uint64_t seed = 1;
  long long samples = 1000000;
  int workers = 0;
  SigmaPolicy sigma;
};

struct CheckRecord {
  std::string what;
  double value = 0.0;
  double tol = 0.0;     // deterministic checks: |value| <= tol
  double z = 0.0;       // stochastic checks
  bool stochastic = false;
  Status status = Status::pass;
};

class CheckList {
 public:
  explicit CheckList(SigmaPolicy p) : policy_(p) {}
  void within(const std::string& what, double value, double tol);
  void flag(const std::string& what, bool ok, double value = 0.0);
  // z-score of a residual with standard error se; `floor` absorbs rounding when se == 0
  void sigma(const std::string& what, double residual, double se, double floor = 1e-12);
  void zscore(const std::string& what, double z);
  Status status() const;
  double worst_z() const { return worst_z_; }
  const std::vector<CheckRecord>& records() const { return recs_; }
  io::json to_json() const;

 private:
  void push(CheckRecord r);
  SigmaPolicy policy_;
  std::vector<CheckRecord> recs_;
  double worst_z_ = 0.0;
};

struct SuiteResult {
  std::string name;
  std::string title;
  Status status = Status::fail;
  std::string summary;
  io::json details;
  double seconds = 0.0;
};

const std::vector<std::string>& suite_names();
std::string suite_title(const std::string& name);
SuiteResult run_suite(const std::string& name, const SuiteConfig& cfg);
io::json suite_json(const SuiteResult& r, const SuiteConfig& cfg);

}  // namespace bubblelab
