#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

namespace bubblelab::detail {

// Gauss-Legendre nodes and weights on [-1, 1].
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int m = 16) {
  static thread_local std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  if (auto it = cache.find(m); it != cache.end()) return it->second;
  std::vector<double> x(m), w(m);
  for (int k = 0; k < m; ++k) {
    double z = std::cos(std::numbers::pi * (k + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int l = 2; l <= m; ++l) {
        const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int l = 2; l <= m; ++l) {
      const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (z * p1 - p0) / (z * z - 1.0);
    x[k] = z;
    w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return cache.emplace(m, std::make_pair(std::move(x), std::move(w))).first->second;
}

// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
template <class F>
double integrate(F&& f, double a, double b, int panels, int m = 16) {
  const auto& [x, w] = gauss_legendre(m);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += w[k] * f(lo + 0.5 * h * (x[k] + 1.0));
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace bubblelab::detail
