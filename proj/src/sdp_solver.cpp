#include "pwqlyap/sdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <utility>
#include <cstdlib>
#include <limits>

#include <Eigen/Sparse>

namespace pwqlyap {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::near_optimal: return "near-optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unknown: return "unknown";
  }
  return "?";
}

std::vector<Matrix> SdpData::block_slacks(const Vector& y) const {
  std::vector<Matrix> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) {
    Matrix S = -b.F0;
    for (const auto& [v, F] : b.terms) S += y(v) * F;
    out.push_back(std::move(S));
  }
  return out;
}

Vector SdpData::row_slacks(const Vector& y) const {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t l = 0; l < rows.size(); ++l) {
    double s = -rows[l].f0;
    for (const auto& [v, a] : rows[l].terms) s += y(v) * a;
    out(static_cast<Eigen::Index>(l)) = s;
  }
  return out;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

double frob_dot(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool is_pd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

// Largest t with M + t dM still positive semidefinite (inf when unbounded).
double max_step(const Matrix& M, const Matrix& dM) {
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix Linv = llt.matrixL().solve(Matrix::Identity(M.rows(), M.cols()));
  const Matrix W = sym(Linv * dM * Linv.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(W, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double max_step(const Vector& x, const Vector& dx) {
  double t = kInf;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (dx(k) < 0.0) t = std::min(t, -x(k) / dx(k));
  }
  return t;
}

Matrix inverse_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

double min_eig(const Matrix& a) {
  if (a.rows() == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct Direction {
  Vector dy;
  std::vector<Matrix> dX, dZ;
  Vector dx, dz;
};

class Solver {
 public:
  Solver(const SdpData& data, const SolverOptions& options)
      : d_(data), opt_(options) {}

  SdpSolution run();

 private:
  Vector apply_A(const std::vector<Matrix>& Xb, const Vector& xl) const {
    Vector r = Vector::Zero(d_.num_vars);
    for (std::size_t b = 0; b < d_.blocks.size(); ++b) {
      for (const auto& [v, F] : d_.blocks[b].terms) r(v) += frob_dot(F, Xb[b]);
    }
    for (std::size_t l = 0; l < d_.rows.size(); ++l) {
      for (const auto& [v, a] : d_.rows[l].terms) {
        r(v) += a * xl(static_cast<Eigen::Index>(l));
      }
    }
    return r;
  }

  std::vector<Matrix> apply_AT(const Vector& y) const {
    std::vector<Matrix> out;
    out.reserve(d_.blocks.size());
    for (const auto& b : d_.blocks) {
      Matrix S = Matrix::Zero(b.size(), b.size());
      for (const auto& [v, F] : b.terms) S += y(v) * F;
      out.push_back(std::move(S));
    }
    return out;
  }

  Vector apply_AT_rows(const Vector& y) const {
    Vector out(static_cast<Eigen::Index>(d_.rows.size()));
    for (std::size_t l = 0; l < d_.rows.size(); ++l) {
      double s = 0.0;
      for (const auto& [v, a] : d_.rows[l].terms) s += y(v) * a;
      out(static_cast<Eigen::Index>(l)) = s;
    }
    return out;
  }

  void initial_point();
  bool factor_schur();
  Vector solve_schur(const Vector& rhs) const;
  Direction direction(double mu, const std::vector<Matrix>* corr_blocks,
                      const Vector* corr_rows) const;
  std::pair<double, double> step_lengths(const Direction& dir) const;

  const SdpData& d_;
  const SolverOptions& opt_;
  int ntotal_ = 0;

  Vector y_;
  std::vector<Matrix> X_, Z_, Zinv_;
  Vector x_, z_;
  std::vector<Matrix> Rd_;
  Vector rd_;

  SpMat schur_;
  Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  bool analyzed_ = false;
};

void Solver::initial_point() {
  y_ = Vector::Zero(d_.num_vars);
  X_.clear();
  Z_.clear();
  for (const auto& b : d_.blocks) {
    const double n = b.size();
    double normA = 0.0;
    double ratio = 0.0;
    for (const auto& [v, F] : b.terms) {
      const double nf = F.norm();
      normA = std::max(normA, nf);
      ratio = std::max(ratio, (1.0 + std::abs(d_.c(v))) / (1.0 + nf));
    }
    const double xi = std::max({10.0, std::sqrt(n), std::sqrt(n) * ratio});
    const double eta = std::max({10.0, std::sqrt(n), b.F0.norm(), normA});
    X_.push_back(xi * Matrix::Identity(b.size(), b.size()));
    Z_.push_back(eta * Matrix::Identity(b.size(), b.size()));
  }
  const auto nr = static_cast<Eigen::Index>(d_.rows.size());
  x_.resize(nr);
  z_.resize(nr);
  for (Eigen::Index l = 0; l < nr; ++l) {
    const auto& row = d_.rows[static_cast<std::size_t>(l)];
    double na = 0.0;
    double ratio = 0.0;
    for (const auto& [v, a] : row.terms) {
      na = std::max(na, std::abs(a));
      ratio = std::max(ratio, (1.0 + std::abs(d_.c(v))) / (1.0 + std::abs(a)));
    }
    x_(l) = std::max(10.0, ratio);
    z_(l) = std::max({10.0, std::abs(row.f0), na});
  }
  ntotal_ = static_cast<int>(nr);
  for (const auto& b : d_.blocks) ntotal_ += b.size();
}

// Schur complement M_uv = tr(F_u X F_v Z^-1) + sum_l a_lu a_lv x_l / z_l.
bool Solver::factor_schur() {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t b = 0; b < d_.blocks.size(); ++b) {
    const auto& terms = d_.blocks[b].terms;
    std::vector<Matrix> G;
    G.reserve(terms.size());
    for (const auto& t : terms) {
      G.push_back((Zinv_[b] * t.second * X_[b]).transpose());
    }
    for (std::size_t p = 0; p < terms.size(); ++p) {
      for (std::size_t q = 0; q <= p; ++q) {
        const double val = frob_dot(terms[q].second, G[p]);
        int r = terms[p].first;
        int c = terms[q].first;
        if (r < c) std::swap(r, c);
        trip.emplace_back(r, c, val);
      }
    }
  }
  for (std::size_t l = 0; l < d_.rows.size(); ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    const double w = x_(li) / z_(li);
    const auto& terms = d_.rows[l].terms;
    for (std::size_t p = 0; p < terms.size(); ++p) {
      for (std::size_t q = 0; q <= p; ++q) {
        int r = terms[p].first;
        int c = terms[q].first;
        if (r < c) std::swap(r, c);
        trip.emplace_back(r, c, w * terms[p].second * terms[q].second);
      }
    }
  }
  const Eigen::Index m = d_.num_vars;
  schur_.resize(m, m);
  schur_.setFromTriplets(trip.begin(), trip.end());
  if (!analyzed_) {
    llt_.analyzePattern(schur_);
    analyzed_ = true;
  }
  llt_.factorize(schur_);
  if (llt_.info() == Eigen::Success) return true;
  // Tiny diagonal shifts before giving up.
  double diag_max = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    diag_max = std::max(diag_max, schur_.coeff(k, k));
  }
  for (double shift = 1e-14; shift <= 1e-6; shift *= 100.0) {
    SpMat shifted = schur_;
    for (Eigen::Index k = 0; k < m; ++k) {
      shifted.coeffRef(k, k) += shift * (1.0 + diag_max);
    }
    llt_.factorize(shifted);
    if (llt_.info() == Eigen::Success) return true;
  }
  return false;
}

Vector Solver::solve_schur(const Vector& rhs) const {
  Vector dy = llt_.solve(rhs);
  // Refinement against the unshifted matrix.
  for (int k = 0; k < 3; ++k) {
    const Vector res = rhs - schur_.selfadjointView<Eigen::Lower>() * dy;
    if (res.norm() <= 1e-15 * (1.0 + rhs.norm())) break;
    dy += llt_.solve(res);
  }
  return dy;
}

Direction Solver::direction(double mu, const std::vector<Matrix>* corr_blocks,
                            const Vector* corr_rows) const {
  const std::size_t nb = d_.blocks.size();
  // Right-hand side: A(mu Z^-1 - X Rd Z^-1 - corr) - c
  std::vector<Matrix> tmp(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    tmp[b] = mu * Zinv_[b] - X_[b] * Rd_[b] * Zinv_[b];
    if (corr_blocks) tmp[b] -= (*corr_blocks)[b];
  }
  Vector tl = mu * z_.cwiseInverse() - x_.cwiseProduct(rd_).cwiseQuotient(z_);
  if (corr_rows) tl -= *corr_rows;
  const Vector rhs = apply_A(tmp, tl) - d_.c;

  Direction dir;
  dir.dy = solve_schur(rhs);
  const std::vector<Matrix> ATdy = apply_AT(dir.dy);
  dir.dZ.resize(nb);
  dir.dX.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    dir.dZ[b] = ATdy[b] + Rd_[b];
    Matrix dX = mu * Zinv_[b] - X_[b] - X_[b] * dir.dZ[b] * Zinv_[b];
    if (corr_blocks) dX -= (*corr_blocks)[b];
    dir.dX[b] = sym(dX);
  }
  dir.dz = apply_AT_rows(dir.dy) + rd_;
  dir.dx = mu * z_.cwiseInverse() - x_ -
           x_.cwiseProduct(dir.dz).cwiseQuotient(z_);
  if (corr_rows) dir.dx -= *corr_rows;
  return dir;
}

std::pair<double, double> Solver::step_lengths(const Direction& dir) const {
  double ap = max_step(x_, dir.dx);
  double ad = max_step(z_, dir.dz);
  for (std::size_t b = 0; b < d_.blocks.size(); ++b) {
    ap = std::min(ap, max_step(X_[b], dir.dX[b]));
    ad = std::min(ad, max_step(Z_[b], dir.dZ[b]));
  }
  return {ap, ad};
}

SdpSolution Solver::run() {
  SdpSolution sol;
  if (d_.c.size() != d_.num_vars) {
    sol.message = "objective has wrong length";
    return sol;
  }
  const auto start = std::chrono::steady_clock::now();
  initial_point();
  const std::size_t nb = d_.blocks.size();
  const double norm_c = d_.c.norm();
  double norm_F0 = 0.0;
  for (const auto& b : d_.blocks) norm_F0 += b.F0.squaredNorm();
  for (const auto& r : d_.rows) norm_F0 += r.f0 * r.f0;
  norm_F0 = std::sqrt(norm_F0);

  // Upper bounds come from strictly feasible y, lower bounds from X with a
  // small equality residual.
  bool have_best = false;
  Vector best_y;
  double best_obj = kInf;
  double best_slack = 0.0;
  double lower = -kInf;
  double min_pinf = kInf;
  double prev_mu = kInf;
  int stalls = 0;
  double gamma = 0.9;
  double ap = 0.0;
  double ad = 0.0;

  auto gap_of = [](double up, double lo) {
    return std::abs(up - lo) / (1.0 + std::abs(up) + std::abs(lo));
  };

  for (int it = 0; it <= opt_.max_iterations; ++it) {
    sol.iterations = it;
    const std::vector<Matrix> S = d_.block_slacks(y_);
    const Vector s_rows = d_.row_slacks(y_);
    Rd_.resize(nb);
    double dinf2 = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      Rd_[b] = S[b] - Z_[b];
      dinf2 += Rd_[b].squaredNorm();
    }
    rd_ = s_rows - z_;
    dinf2 += rd_.squaredNorm();
    const Vector AX = apply_A(X_, x_);

    double XZ = x_.dot(z_);
    double xobj = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      XZ += frob_dot(X_[b], Z_[b]);
      xobj += frob_dot(d_.blocks[b].F0, X_[b]);
    }
    for (std::size_t l = 0; l < d_.rows.size(); ++l) {
      xobj += d_.rows[l].f0 * x_(static_cast<Eigen::Index>(l));
    }
    const double mu = XZ / std::max(1, ntotal_);
    const double yobj = d_.c.dot(y_);
    const double relgap = gap_of(yobj, xobj);
    const double pinf = (d_.c - AX).norm() / (1.0 + norm_c);
    const double dinf = std::sqrt(dinf2) / (1.0 + norm_F0);
    min_pinf = std::min(min_pinf, pinf);

    double slack = s_rows.size() ? s_rows.minCoeff() : kInf;
    for (std::size_t b = 0; b < nb && slack > 0.0; ++b) {
      slack = std::min(slack, min_eig(S[b]));
    }
    const bool y_feasible = slack > 0.0;
    if (y_feasible && yobj <= best_obj) {
      have_best = true;
      best_y = y_;
      best_obj = yobj;
      best_slack = slack;
    }
    if (pinf <= opt_.feas_tol * 100.0) lower = std::max(lower, xobj);
    if (dinf <= std::sqrt(opt_.feas_tol) && pinf <= 1e-2 &&
        relgap <= std::max(opt_.near_gap_tol, 1e-2)) {
      sol.approx_y = y_;
      sol.approx_objective = yobj;
    }
    if (opt_.verbose) {
      std::fprintf(stderr,
                   "%3d c'y %+.8e F0.X %+.8e gap %.1e pinf %.1e dinf %.1e "
                   "mu %.1e step %.2f %.2f%s\n",
                   it, yobj, xobj, relgap, pinf, dinf, mu, ap, ad,
                   y_feasible ? " feasible" : "");
    }

    if (have_best && lower > -kInf && gap_of(best_obj, lower) < opt_.gap_tol) {
      sol.message = "converged";
      break;
    }
    if (relgap < opt_.gap_tol && pinf < opt_.feas_tol &&
        dinf < opt_.feas_tol) {
      sol.message = "converged";
      if (!have_best || yobj <= best_obj) {
        // Residuals are within tolerance; report the current iterate even
        // when roundoff leaves a slack eigenvalue marginally negative.
        have_best = true;
        best_y = y_;
        best_obj = yobj;
        best_slack = slack;
      }
      lower = std::max(lower, xobj);
      break;
    }
    // X certifies infeasibility: A(X) ~ 0 relative to F0 . X > 0.
    if (xobj > 0.0 && AX.norm() <= opt_.feas_tol * xobj &&
        xobj > 1e3 * (1.0 + norm_c)) {
      sol.status = SolveStatus::infeasible;
      sol.message = "primal infeasibility certificate";
      return sol;
    }
    if (yobj < -1e10 * (1.0 + norm_F0) && dinf < opt_.feas_tol) {
      sol.message = "objective unbounded below";
      return sol;
    }
    if (opt_.time_limit > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count() > opt_.time_limit) {
      sol.message = "time limit";
      break;
    }
    if (it == opt_.max_iterations) {
      sol.message = "iteration limit";
      break;
    }
    // The X side blows up when the y side has no interior point.
    if (it > 10 && pinf > 1e4 * std::max(min_pinf, opt_.feas_tol)) {
      sol.message = "diverging";
      break;
    }

    Zinv_.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) Zinv_[b] = sym(inverse_spd(Z_[b]));
    if (!factor_schur()) {
      sol.message = "Schur complement factorization failed";
      break;
    }

    // Predictor.
    const Direction pred = direction(0.0, nullptr, nullptr);
    std::tie(ap, ad) = step_lengths(pred);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    double XZa = (x_ + ap * pred.dx).dot(z_ + ad * pred.dz);
    for (std::size_t b = 0; b < nb; ++b) {
      XZa += frob_dot(X_[b] + ap * pred.dX[b], Z_[b] + ad * pred.dZ[b]);
    }
    const double mu_aff = XZa / std::max(1, ntotal_);
    const double sigma =
        std::clamp(std::pow(std::max(0.0, mu_aff) / mu, 3), 0.0, 1.0);

    // Corrector with the second-order term.
    std::vector<Matrix> corr(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      corr[b] = pred.dX[b] * pred.dZ[b] * Zinv_[b];
    }
    const Vector corr_rows = pred.dx.cwiseProduct(pred.dz).cwiseQuotient(z_);
    const Direction dir = direction(sigma * mu, &corr, &corr_rows);
    std::tie(ap, ad) = step_lengths(dir);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    // Shrink if roundoff broke definiteness.
    for (int tries = 0; tries < 30; ++tries) {
      bool ok = x_.size() == 0 || ((x_ + ap * dir.dx).minCoeff() > 0.0 &&
                                   (z_ + ad * dir.dz).minCoeff() > 0.0);
      for (std::size_t b = 0; ok && b < nb; ++b) {
        ok = is_pd(X_[b] + ap * dir.dX[b]) && is_pd(Z_[b] + ad * dir.dZ[b]);
      }
      if (ok) break;
      ap *= 0.8;
      ad *= 0.8;
    }
    for (std::size_t b = 0; b < nb; ++b) {
      X_[b] = sym(X_[b] + ap * dir.dX[b]);
      Z_[b] = sym(Z_[b] + ad * dir.dZ[b]);
    }
    x_ += ap * dir.dx;
    z_ += ad * dir.dz;
    y_ += ad * dir.dy;
    gamma = 0.9 + 0.09 * std::min(ap, ad);

    if (mu > 0.98 * prev_mu && std::max(ap, ad) < 1e-3) {
      if (++stalls >= 6) {
        sol.message = "stalled";
        break;
      }
    } else {
      stalls = 0;
    }
    prev_mu = mu;
  }

  if (have_best) {
    sol.y = best_y;
    sol.objective = best_obj;
    sol.min_slack = best_slack;
    sol.lower_bound = lower;
    sol.relative_gap = lower > -kInf ? gap_of(best_obj, lower) : kInf;
    if (sol.relative_gap < opt_.gap_tol) {
      sol.status = SolveStatus::optimal;
    } else if (sol.relative_gap <= opt_.near_gap_tol) {
      sol.status = SolveStatus::near_optimal;
    } else {
      sol.y.resize(0);
    }
  }
  return sol;
}

}  // namespace

SdpSolution solve_sdp(const SdpData& data, const SolverOptions& options) {
  Solver solver(data, options);
  return solver.run();
}

double min_slack(const SdpData& data, const Vector& y) {
  const Vector rows = data.row_slacks(y);
  double out = rows.size() ? rows.minCoeff() : kInf;
  for (const Matrix& S : data.block_slacks(y)) out = std::min(out, min_eig(S));
  return out;
}

RecenterResult recenter(const SdpData& data, double budget,
                        const SolverOptions& options) {
  // Variables (y, t): maximize t, i.e. minimize -t.
  SdpData aug;
  const int t = data.num_vars;
  aug.num_vars = data.num_vars + 1;
  aug.c = Vector::Zero(aug.num_vars);
  aug.c(t) = -1.0;
  for (const auto& b : data.blocks) {
    SdpBlockData nb = b;
    nb.terms.emplace_back(t, -Matrix::Identity(b.size(), b.size()));
    aug.blocks.push_back(std::move(nb));
  }
  aug.rows = data.rows;
  LinearRowData cap;
  cap.f0 = -budget;
  for (int v = 0; v < data.num_vars; ++v) {
    if (data.c(v) != 0.0) cap.terms.emplace_back(v, -data.c(v));
  }
  aug.rows.push_back(std::move(cap));

  const SdpSolution s = solve_sdp(aug, options);
  RecenterResult out;
  out.status = s.status;
  out.iterations = s.iterations;
  if (s.y.size() > 0) {
    out.y = s.y.head(data.num_vars);
    out.t = s.y(t);
    out.objective = data.c.dot(out.y);
  }
  return out;
}

}  // namespace pwqlyap
