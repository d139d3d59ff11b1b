#include "pwqlyap/lp.hpp"

#include <cmath>
#include <vector>

namespace pwqlyap {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::feasible: return "feasible";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unknown: return "unknown";
  }
  return "?";
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

// Column j of the standard-form problem refers to original variable
// `source` with sign +1 or -1 (free variables are split in two).
struct Column {
  int source;
  double sign;
};

struct StandardForm {
  Matrix A;                 // rows already sign-normalised so that b >= 0
  Vector b;
  Vector row_sign;          // +-1 per row
  std::vector<Column> cols;
};

StandardForm to_standard(const Matrix& Aeq, const Vector& beq,
                         const Vector& lower) {
  StandardForm sf;
  const auto n = Aeq.cols();
  sf.b = beq;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isfinite(lower(j))) {
      sf.b -= Aeq.col(j) * lower(j);
      sf.cols.push_back({static_cast<int>(j), 1.0});
    } else {
      sf.cols.push_back({static_cast<int>(j), 1.0});
      sf.cols.push_back({static_cast<int>(j), -1.0});
    }
  }
  sf.A.resize(Aeq.rows(), static_cast<Eigen::Index>(sf.cols.size()));
  for (std::size_t k = 0; k < sf.cols.size(); ++k) {
    sf.A.col(static_cast<Eigen::Index>(k)) =
        Aeq.col(sf.cols[k].source) * sf.cols[k].sign;
  }
  sf.row_sign = Vector::Ones(Aeq.rows());
  for (Eigen::Index i = 0; i < Aeq.rows(); ++i) {
    if (sf.b(i) < 0) {
      sf.row_sign(i) = -1.0;
      sf.b(i) = -sf.b(i);
      sf.A.row(i) *= -1.0;
    }
  }
  return sf;
}

double residual_of(const Matrix& A, const Vector& b, const Vector& x) {
  if (A.rows() == 0) return 0.0;
  return (A * x - b).cwiseAbs().maxCoeff();
}

}  // namespace

LpResult lp_feasible(const Matrix& Aeq, const Vector& beq, const Vector& lower,
                     const LpOptions& options) {
  if (Aeq.rows() != beq.size() || Aeq.cols() != lower.size()) {
    throw ModelError("lp_feasible: inconsistent dimensions");
  }
  const StandardForm sf = to_standard(Aeq, beq, lower);
  const auto rows = sf.A.rows();
  const auto ncols = sf.A.cols();
  const auto total = ncols + rows;  // structural + artificial

  // Tableau [A | I | b]; objective row holds reduced costs of phase one.
  Matrix T = Matrix::Zero(rows, total + 1);
  T.leftCols(ncols) = sf.A;
  T.block(0, ncols, rows, rows).setIdentity();
  T.col(total) = sf.b;
  Vector cost_row = Vector::Zero(total + 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    cost_row.head(ncols) -= T.row(i).head(ncols).transpose();
    cost_row(total) -= T(i, total);
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) basis[i] = ncols + i;

  LpResult result;
  int pivots = 0;
  bool stalled = false;
  while (true) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < total; ++j) {
      if (cost_row(j) < -kCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double a = T(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = T(i, total) / a;
      if (leave < 0 || ratio < best - 1e-15 ||
          (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) break;  // cannot happen in phase one (objective >= 0)
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != leave && T(i, enter) != 0.0) {
        T.row(i) -= T(i, enter) * T.row(leave);
      }
    }
    cost_row -= cost_row(enter) * T.row(leave).transpose();
    basis[leave] = enter;
    if (++pivots > options.max_pivots) {
      stalled = true;
      break;
    }
  }
  if (stalled) return result;

  const double scale = 1.0 + sf.b.cwiseAbs().sum();
  const double phase_one = -cost_row(total);

  auto extract_point = [&](const Vector& basic_values) {
    Vector xs = Vector::Zero(ncols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (basis[i] < ncols) xs(basis[i]) = std::max(0.0, basic_values(i));
    }
    Vector x = Vector::Zero(Aeq.cols());
    for (Eigen::Index j = 0; j < Aeq.cols(); ++j) {
      if (std::isfinite(lower(j))) x(j) = lower(j);
    }
    for (Eigen::Index k = 0; k < ncols; ++k) {
      const Column& c = sf.cols[k];
      x(c.source) += c.sign * xs(k);
    }
    return x;
  };

  if (phase_one <= 1e-10 * scale) {
    Vector x = extract_point(T.col(total));
    double res = residual_of(Aeq, beq, x);
    if (res > options.feasibility_tol) {
      // Re-solve the basic system directly from the original columns.
      Matrix B = Matrix::Zero(rows, rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (basis[i] < ncols) {
          B.col(i) = sf.A.col(basis[i]);
        } else {
          B(basis[i] - ncols, i) = 1.0;
        }
      }
      Vector refined = B.colPivHouseholderQr().solve(sf.b);
      x = extract_point(refined);
      res = residual_of(Aeq, beq, x);
    }
    if (res <= options.feasibility_tol) {
      result.status = LpStatus::feasible;
      result.point = std::move(x);
      result.residual = res;
    }
    return result;
  }

  // Phase-one duals: reduced cost of artificial k is 1 - y_k.
  Vector y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) y(i) = 1.0 - cost_row(ncols + i);
  const double gap = y.dot(sf.b);
  const double worst = ncols > 0 ? (sf.A.transpose() * y).maxCoeff() : 0.0;
  const double ynorm = 1.0 + y.cwiseAbs().maxCoeff();
  if (gap > 1e-9 * scale && worst <= 1e-9 * ynorm) {
    result.status = LpStatus::infeasible;
    result.farkas = y.cwiseProduct(sf.row_sign);
    result.residual = std::max(0.0, worst);
  }
  return result;
}

}  // namespace pwqlyap
