#pragma once

#include <limits>

#include "pwqlyap/model.hpp"

namespace pwqlyap {

enum class LpStatus { feasible, infeasible, unknown };

const char* to_string(LpStatus s);

struct LpOptions {
  // Equality residual accepted for a reported feasible point.
  double feasibility_tol = 1e-8;
  int max_pivots = 20000;
};

struct LpResult {
  LpStatus status = LpStatus::unknown;
  // Feasible: a point x with A x = b, x >= lower.
  Vector point;
  // Infeasible: y with y'(b - A l) > 0, y'A_j <= 0 for bounded columns and
  // y'A_j = 0 for free ones. No x >= l can satisfy A x = b then.
  Vector farkas;
  double residual = 0.0;
};

inline constexpr double kFree = -std::numeric_limits<double>::infinity();

/// Feasibility of {x | Aeq x = beq, x >= lower}. Entries of `lower` equal to
/// -inf mark free variables. Solved by a dense two-phase-style simplex (phase
/// one only) with Bland's rule; results are checked a posteriori and anything
/// that fails the check comes back as `unknown`.
LpResult lp_feasible(const Matrix& Aeq, const Vector& beq, const Vector& lower,
                     const LpOptions& options = {});

}  // namespace pwqlyap
