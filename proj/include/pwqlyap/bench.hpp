#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pwqlyap/certificate.hpp"
#include "pwqlyap/model.hpp"

namespace pwqlyap {

struct GenParams {
  int d = 2;
  int m = 1;
  int cells = 4;
  // Entries of A, B, b and of the hyperplanes are uniform in [-scale, scale].
  double scale = 1.0;
  double rho = 0.9;  // target spectral radius, in (0, 1)
  double input_bound = 1.0;  // U = [-input_bound, input_bound]^m
  double init_bound = 1.0;   // X0 = [-init_bound, init_bound]^d x U
  std::uint64_t seed = 0;

  // Throws ModelError unless 1 <= d <= 4, m == 1, 1 <= cells <= 4,
  // scale > 0, 0 < rho < 1 and both bounds are positive.
  void validate() const;
};

/// Exact partition of the state-input space by at most two hyperplanes h1,
/// h2. One cell per leaf of the split tree: the strict side h < 0 takes the
/// then-branch and h >= 0 the else-branch. cells = 2 splits once, 3 splits
/// the else side of h1 by h2, 4 splits both sides (the sign chambers).
/// Every cell also carries the input-range rows.
std::vector<Polyhedron> random_partition(const GenParams& params,
                                         std::mt19937_64& rng);

double spectral_radius(const Matrix& A);

/// Rescales A by rho / rho(A) * (1 - 1e-6) when rho(A) >= rho.
void enforce_stable(Matrix& A, double rho);

AffineLaw random_stable_law(const GenParams& params, std::mt19937_64& rng);

PwaSystem generate_system(const GenParams& params);

struct SystemCheck {
  bool partition_ok = false;  // disjoint cells and sampled coverage
  double coverage = 0.0;      // fraction of box samples inside some cell
  bool stable_ok = false;     // every law has rho(A) < 1
};

/// Disjointness LPs plus `samples` uniform draws over [-R, R]^d x U with
/// R = 10 * init_bound; coverage must reach 99.9%.
SystemCheck check_generated(const PwaSystem& system, const GenParams& params,
                            int samples = 10000);

struct BatchItem {
  int index = 0;
  std::uint64_t seed = 0;
  int d = 0;
  int cells = 0;
  AnalysisStatus status = AnalysisStatus::unknown;
  double objective = 0.0;
  double seconds = 0.0;
  SystemCheck check;
  std::string message;
};

struct BatchOptions {
  int n = 50;
  std::uint64_t seed = 7;
  // Seed is overwritten per item. With vary_shape, d and cells are upper
  // bounds and each item draws its own from [1, d] x [1, cells].
  GenParams params{4, 1, 4};
  bool vary_shape = true;
  double timeout = 60.0;  // seconds per system
  int workers = 1;
  AnalyzeOptions analyze;
};

struct BatchSummary {
  std::vector<BatchItem> items;
  int accepted = 0;
  int partition_ok = 0;
  int stable_ok = 0;
  double seconds = 0.0;

  double success_rate() const;
};

/// Item i is generated from a seed derived from (seed, i), so results do
/// not depend on the worker count. Failures are recorded per item.
BatchSummary run_batch(const BatchOptions& options);

std::string batch_report_json(const BatchSummary& summary);

}  // namespace pwqlyap
