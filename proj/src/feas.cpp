#include "pwqlyap/feas.hpp"

#include <algorithm>
#include <cmath>

namespace pwqlyap {

double MotzkinCertificate::violation(const QuadMatrix& q) const {
  if (p_strict.size() != q.n_strict || p_weak.size() != q.n_weak()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  if (q.rows() > 0) {
    Vector combo = q.strict_block().transpose() * p_strict +
                   q.weak_block().transpose() * p_weak;
    if (combo.size() > 0) worst = combo.cwiseAbs().maxCoeff();
  }
  worst = std::max(worst, std::abs(p_strict.sum() - 1.0));
  if (p_strict.size() > 0) worst = std::max(worst, -p_strict.minCoeff());
  if (p_weak.size() > 0) worst = std::max(worst, -p_weak.minCoeff());
  return worst;
}

EmptinessResult decide_emptiness(const QuadMatrix& q,
                                 const LpOptions& options) {
  EmptinessResult out;
  const int rows = q.rows();
  const auto cols = q.E.cols();
  if (q.n_strict == 0) {
    // y = 0 satisfies any homogeneous weak system.
    out.verdict = Emptiness::nonempty;
    return out;
  }
  // Unknowns p = (p_strict, p_weak) >= 0.
  Matrix A = Matrix::Zero(cols + 1, rows);
  A.topRows(cols) = q.E.transpose();
  A.bottomRows(1).leftCols(q.n_strict).setOnes();
  Vector b = Vector::Zero(cols + 1);
  b(cols) = 1.0;
  const Vector lower = Vector::Zero(rows);

  const LpResult lp = lp_feasible(A, b, lower, options);
  if (lp.status == LpStatus::infeasible) {
    out.verdict = Emptiness::nonempty;
  } else if (lp.status == LpStatus::feasible) {
    MotzkinCertificate cert{lp.point.head(q.n_strict),
                            lp.point.tail(q.n_weak())};
    if (cert.valid_for(q, options.feasibility_tol)) {
      out.verdict = Emptiness::empty;
      out.certificate = std::move(cert);
    }
  }
  return out;
}

SwitchDecision decide_switch(const PwaSystem& system, std::size_t i,
                             std::size_t j) {
  if (i >= system.size() || j >= system.size()) {
    throw ModelError("switch index out of range");
  }
  const QuadMatrix q =
      switch_quadratization(system.cells[i], system.laws[i], system.cells[j]);
  EmptinessResult e = decide_emptiness(q);
  SwitchDecision d;
  d.verdict = e.verdict;
  d.fireable = e.verdict != Emptiness::empty;
  d.certificate = std::move(e.certificate);
  return d;
}

bool switch_fireable(const PwaSystem& system, std::size_t i, std::size_t j) {
  return decide_switch(system, i, j).fireable;
}

std::size_t SwitchGraph::fireable_count() const {
  return static_cast<std::size_t>(
      std::count_if(decisions_.begin(), decisions_.end(),
                    [](const SwitchDecision& d) { return d.fireable; }));
}

SwitchGraph build_switch_graph(const PwaSystem& system) {
  SwitchGraph g(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = 0; j < system.size(); ++j) {
      g.decision(i, j) = decide_switch(system, i, j);
    }
  }
  return g;
}

bool init_intersects_cell(const PwaSystem& system, std::size_t i) {
  if (i >= system.size()) throw ModelError("cell index out of range");
  const QuadMatrix q = init_quadratization(system.init, system.cells[i]);
  return decide_emptiness(q).verdict != Emptiness::empty;
}

std::vector<std::pair<std::size_t, std::size_t>> cells_disjoint(
    const PwaSystem& system) {
  std::vector<std::pair<std::size_t, std::size_t>> overlaps;
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = i + 1; j < system.size(); ++j) {
      // Same block layout as the init/cell intersection.
      const QuadMatrix q =
          init_quadratization(system.cells[i], system.cells[j]);
      if (decide_emptiness(q).verdict != Emptiness::empty) {
        overlaps.emplace_back(i, j);
      }
    }
  }
  return overlaps;
}

bool input_bounded(const PwaSystem& system) {
  const Polyhedron& U = system.input;
  const int m = U.dim();
  const int rows = U.n_strict() + U.n_weak();
  Matrix T(rows, m);
  T << U.Ts(), U.Tw();
  // Unknowns (r free, s >= 0): T r + s = 0, sign * r_k = 1.
  Matrix A = Matrix::Zero(rows + 1, m + rows);
  A.topLeftCorner(rows, m) = T;
  A.topRightCorner(rows, rows).setIdentity();
  Vector b = Vector::Zero(rows + 1);
  b(rows) = 1.0;
  Vector lower(m + rows);
  lower.head(m).setConstant(kFree);
  lower.tail(rows).setZero();
  for (int k = 0; k < m; ++k) {
    for (double sign : {1.0, -1.0}) {
      A.bottomRows(1).setZero();
      A(rows, k) = sign;
      if (lp_feasible(A, b, lower).status != LpStatus::infeasible) {
        return false;
      }
    }
  }
  return true;
}

namespace {

// Closure of `poly` intersected with {sign * z_k >= t}, or the closure alone
// for k < 0: unknowns (z free, slacks >= 0). `unknown` is reported as
// feasible so bounds only grow.
bool closure_reaches(const Polyhedron& poly, int k, double sign, double t) {
  const int n = poly.dim();
  const int rows = poly.n_strict() + poly.n_weak();
  const int extra = k >= 0 ? 1 : 0;
  Matrix A = Matrix::Zero(rows + extra, n + rows + extra);
  Vector b(rows + extra);
  A.block(0, 0, poly.n_strict(), n) = poly.Ts();
  A.block(poly.n_strict(), 0, poly.n_weak(), n) = poly.Tw();
  A.block(0, n, rows, rows).setIdentity();
  b.head(poly.n_strict()) = poly.cs();
  b.segment(poly.n_strict(), poly.n_weak()) = poly.cw();
  if (extra) {
    A(rows, k) = sign;
    A(rows, n + rows) = -1.0;
    b(rows) = t;
  }
  Vector lower(n + rows + extra);
  lower.head(n).setConstant(kFree);
  lower.tail(rows + extra).setZero();
  return lp_feasible(A, b, lower).status != LpStatus::infeasible;
}

}  // namespace

std::optional<Box> bounding_box(const Polyhedron& poly, double tol,
                                double limit) {
  const int n = poly.dim();
  if (!closure_reaches(poly, -1, 0.0, 0.0)) return std::nullopt;
  Box box{Vector(n), Vector(n)};
  for (int k = 0; k < n; ++k) {
    for (double sign : {1.0, -1.0}) {
      // Largest t with sign * z_k >= t reachable.
      double lo = -limit;
      double hi = 1.0;
      while (closure_reaches(poly, k, sign, hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > limit) return std::nullopt;
      }
      if (lo == -limit) {
        // Bracket from below as well.
        double probe = -1.0;
        while (!closure_reaches(poly, k, sign, probe)) {
          hi = probe;
          probe *= 2.0;
          if (probe < -limit) return std::nullopt;
        }
        lo = probe;
      }
      while (hi - lo > tol * (1.0 + std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        if (closure_reaches(poly, k, sign, mid)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      if (sign > 0.0) {
        box.hi(k) = hi;
      } else {
        box.lo(k) = -hi;
      }
    }
  }
  return box;
}

}  // namespace pwqlyap
