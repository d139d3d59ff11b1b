#pragma once

#include <string>
#include <vector>

#include "pwqlyap/feas.hpp"
#include "pwqlyap/model.hpp"
#include "pwqlyap/program.hpp"
#include "pwqlyap/sdp_solver.hpp"

namespace pwqlyap {

struct BlockResidual {
  std::string block;
  double min_eig = 0.0;
};

/// Piecewise quadratic V_i(z) = z' P_i z + 2 q_i' z with level alpha and
/// squared-norm bound beta on the sublevel set.
struct Certificate {
  double alpha = 0.0;
  double beta = 0.0;
  double eps = 0.0;
  std::vector<Matrix> P;
  std::vector<Vector> q;
  std::vector<BlockResidual> residuals;

  // V_i at z = (x, u).
  double value(std::size_t cell, const Vector& z) const;
};

inline constexpr double kResidualTol = 1e-6;

struct CertificateReport {
  Certificate certificate;
  bool accepted = false;
  int worst_block = -1;  // index into certificate.residuals
  std::string reason;    // empty when accepted
};

/// Re-evaluates every block at the solution, without the margin and with
/// multiplier entries clamped at zero, and accepts iff every minimum
/// eigenvalue is >= -kResidualTol and beta >= 0.
CertificateReport extract_certificate(const SdpSolution& solution,
                                      const ConicProgram& program);

/// Residual report for an arbitrary point y (no status requirement).
std::vector<BlockResidual> block_residuals(const ConicProgram& program,
                                           const Vector& y, bool clamp);

struct AnalyzeOptions {
  double eps = 1e-7;
  // Each rejected certificate triggers a re-solve with eps scaled by
  // eps_growth, at most max_retries times.
  int max_retries = 2;
  double eps_growth = 100.0;
  // Relative objective slack for the recentering pass, tried in order.
  std::vector<double> budget_slack{1e-4, 1e-3, 1e-2, 1e-1};
  // Wall-clock limit for the whole analysis in seconds; 0 disables it.
  double time_limit = 0.0;
  SolverOptions solver;
};

enum class AnalysisStatus { accepted, rejected, infeasible, unknown };

const char* to_string(AnalysisStatus s);

struct AnalysisResult {
  AnalysisStatus status = AnalysisStatus::unknown;
  SwitchGraph graph;
  std::vector<bool> init_meets;
  std::size_t num_vars = 0;
  std::size_t num_blocks = 0;
  SdpSolution solution;
  CertificateReport report;
  double eps_used = 0.0;
  int attempts = 0;
  // Set when the certificate came from the recentering pass.
  bool recentered = false;
  double budget = 0.0;
  double seconds = 0.0;
};

/// Switch pruning, init intersection tests, assembly, solve, extraction.
/// When the plain solve ends without an accepted certificate (the margin
/// usually makes the program infeasible by a hair, because every fixed point
/// inside a cell pins an invariance block at zero), the best approximate
/// objective J is turned into a budget J + s(1+|J|) and the most interior
/// point within that budget is certified instead.
AnalysisResult analyze(const PwaSystem& system,
                       const AnalyzeOptions& options = {});

}  // namespace pwqlyap
