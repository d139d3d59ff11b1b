#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pwqlyap/model.hpp"

namespace pwqlyap {

// Block-diagonal SDP in the SDPA primal convention:
//
//   minimize    c'y
//   subject to  sum_v y_v F_v - F_0  >= 0   (each semidefinite block)
//               sum_v y_v a_v - f_0  >= 0   (each linear row)
//
// Semidefinite blocks are small and dense; variables that do not appear in a
// block are simply absent from its term list.
struct SdpBlockData {
  Matrix F0;
  std::vector<std::pair<int, Matrix>> terms;

  int size() const { return static_cast<int>(F0.rows()); }
};

struct LinearRowData {
  double f0 = 0.0;
  std::vector<std::pair<int, double>> terms;
};

struct SdpData {
  int num_vars = 0;
  Vector c;
  std::vector<SdpBlockData> blocks;
  std::vector<LinearRowData> rows;

  // Slack of every block / row at y, without F0 sign games: sum y F - F0.
  std::vector<Matrix> block_slacks(const Vector& y) const;
  Vector row_slacks(const Vector& y) const;
};

enum class SolveStatus { optimal, near_optimal, infeasible, unknown };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  // Accepted as near-optimal: strictly feasible y whose objective is within
  // this relative distance of the best lower bound seen.
  double near_gap_tol = 1e-4;
  int max_iterations = 120;
  // Wall-clock limit in seconds; 0 disables it.
  double time_limit = 0.0;
  bool verbose = false;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::unknown;
  // Set for optimal and near-optimal runs only.
  Vector y;
  double objective = 0.0;  // c'y
  double lower_bound = -std::numeric_limits<double>::infinity();
  double relative_gap = 0.0;
  // Smallest eigenvalue over all block and row slacks at y.
  double min_slack = 0.0;
  int iterations = 0;
  std::string message;
  // Last iterate with small residuals and gap, kept even when the run ends
  // without a strictly feasible point. Empty if there was none.
  Vector approx_y;
  double approx_objective = 0.0;
};

/// Infeasible-start primal-dual path-following method with the HKM search
/// direction and a Mehrotra predictor-corrector step. `y` holds the best
/// strictly feasible iterate; it is left empty for runs that did not
/// produce one.
SdpSolution solve_sdp(const SdpData& data, const SolverOptions& options = {});

/// Smallest slack eigenvalue over blocks and rows at y.
double min_slack(const SdpData& data, const Vector& y);

struct RecenterResult {
  SolveStatus status = SolveStatus::unknown;
  Vector y;
  double t = 0.0;  // every block slack is >= t Id at y
  double objective = 0.0;
  int iterations = 0;
};

/// Maximizes t subject to every semidefinite block slack >= t Id, the linear
/// rows, and c'y <= budget. Used when the problem has no strictly feasible
/// point: the result is the most interior y within the objective budget.
RecenterResult recenter(const SdpData& data, double budget,
                        const SolverOptions& options = {});

}  // namespace pwqlyap
