#pragma once

#include <random>
#include <string>

#include "pwqlyap/certificate.hpp"
#include "pwqlyap/json_io.hpp"
#include "pwqlyap/model.hpp"

namespace pwqlyap::testing {

inline std::string source_path(const std::string& rel) {
  return std::string(PWQLYAP_SOURCE_DIR) + "/" + rel;
}

inline const PwaSystem& running() {
  static const PwaSystem sys = load_system(source_path("examples/running.json"));
  return sys;
}

// The running example is analyzed once per process.
inline const AnalysisResult& running_analysis() {
  static const AnalysisResult res = analyze(running());
  return res;
}

inline Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix M(static_cast<Eigen::Index>(r.size()),
           r.size() ? static_cast<Eigen::Index>(r.begin()->size()) : 0);
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) M(i, j++) = v;
    ++i;
  }
  return M;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (int k = 0; k < n; ++k) v(k) = dist(rng);
  return v;
}

}  // namespace pwqlyap::testing
