#include "pwqlyap/certificate.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pwqlyap {

const char* to_string(AnalysisStatus s) {
  switch (s) {
    case AnalysisStatus::accepted: return "accepted";
    case AnalysisStatus::rejected: return "rejected";
    case AnalysisStatus::infeasible: return "infeasible";
    case AnalysisStatus::unknown: return "unknown";
  }
  return "?";
}

double Certificate::value(std::size_t cell, const Vector& z) const {
  return z.dot(P.at(cell) * z) + 2.0 * q.at(cell).dot(z);
}

std::vector<BlockResidual> block_residuals(const ConicProgram& program,
                                           const Vector& y, bool clamp) {
  Vector point = y;
  if (clamp) {
    const auto& vars = program.variables();
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const auto k = static_cast<Eigen::Index>(v);
      if (vars[v].nonnegative) point(k) = std::max(point(k), 0.0);
    }
  }
  std::vector<BlockResidual> out;
  for (std::size_t b = 0; b < program.blocks().size(); ++b) {
    const Matrix M = program.evaluate(b, point, false);
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    out.push_back({program.blocks()[b].label(), es.eigenvalues()(0)});
  }
  return out;
}

CertificateReport extract_certificate(const SdpSolution& solution,
                                      const ConicProgram& program) {
  CertificateReport rep;
  if (solution.status != SolveStatus::optimal &&
      solution.status != SolveStatus::near_optimal) {
    rep.reason = std::string("solver status ") + to_string(solution.status);
    return rep;
  }
  const Vector& y = solution.y;
  Certificate& c = rep.certificate;
  c.alpha = y(program.alpha());
  c.beta = y(program.beta());
  c.eps = program.margin();
  for (std::size_t i = 0; i < program.cells(); ++i) {
    c.P.push_back(program.P_value(y, i));
    c.q.push_back(program.q_value(y, i));
  }
  c.residuals = block_residuals(program, y, true);

  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < c.residuals.size(); ++b) {
    if (c.residuals[b].min_eig < worst) {
      worst = c.residuals[b].min_eig;
      rep.worst_block = static_cast<int>(b);
    }
  }
  std::ostringstream why;
  if (!std::isfinite(c.alpha) || !std::isfinite(c.beta)) {
    why << "non-finite alpha or beta";
  } else if (c.beta < 0.0) {
    why << "beta = " << c.beta << " is negative";
  } else if (rep.worst_block >= 0 && worst < -kResidualTol) {
    why << "block " << c.residuals[static_cast<std::size_t>(rep.worst_block)].block
        << " has minimum eigenvalue " << worst;
  }
  rep.reason = why.str();
  rep.accepted = rep.reason.empty();
  return rep;
}

AnalysisResult analyze(const PwaSystem& system, const AnalyzeOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  system.validate();
  AnalysisResult res;
  res.graph = build_switch_graph(system);
  res.init_meets.resize(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) {
    res.init_meets[i] = init_intersects_cell(system, i);
  }
  auto solver_options = [&]() {
    SolverOptions o = options.solver;
    if (options.time_limit > 0.0) {
      const double used = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
      o.time_limit = std::max(options.time_limit - used, 1e-3);
    }
    return o;
  };
  auto out_of_time = [&]() {
    return options.time_limit > 0.0 &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                   .count() >= options.time_limit;
  };
  double eps = options.eps;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    const ConicProgram prog =
        assemble_program(system, res.graph, res.init_meets, eps);
    const SdpData data = prog.to_sdp_data();
    res.num_vars = prog.num_vars();
    res.num_blocks = prog.blocks().size();
    res.solution = solve_sdp(data, solver_options());
    res.report = extract_certificate(res.solution, prog);
    res.eps_used = eps;
    res.attempts = attempt + 1;
    res.recentered = false;
    if (res.report.accepted) {
      res.status = AnalysisStatus::accepted;
      break;
    }
    // With a positive margin the program is infeasible whenever a block is
    // pinned at zero, so the level comes from the margin-free program.
    SdpSolution first = res.solution;
    if (first.status == SolveStatus::infeasible && eps > 0.0) {
      first = solve_sdp(
          assemble_program(system, res.graph, res.init_meets, 0.0)
              .to_sdp_data(),
          solver_options());
    }
    if (first.status == SolveStatus::infeasible) {
      res.solution = first;
      res.status = AnalysisStatus::infeasible;
      break;
    }
    const bool have_level = first.y.size() > 0 || first.approx_y.size() > 0;
    if (have_level) {
      const double level =
          first.y.size() > 0 ? first.objective : first.approx_objective;
      for (double slack : options.budget_slack) {
        if (out_of_time()) break;
        const double budget = level + slack * (1.0 + std::abs(level));
        const RecenterResult rc = recenter(data, budget, solver_options());
        if (rc.y.size() == 0) continue;
        SdpSolution sol = first;
        sol.status = SolveStatus::near_optimal;
        sol.y = rc.y;
        sol.objective = rc.objective;
        sol.min_slack = rc.t;
        sol.iterations = first.iterations + rc.iterations;
        sol.relative_gap =
            std::isfinite(first.lower_bound)
                ? std::abs(rc.objective - first.lower_bound) /
                      (1.0 + std::abs(rc.objective) +
                       std::abs(first.lower_bound))
                : std::numeric_limits<double>::infinity();
        sol.message = "recentered";
        CertificateReport rep = extract_certificate(sol, prog);
        if (rep.accepted || !res.recentered) {
          res.solution = std::move(sol);
          res.report = std::move(rep);
          res.recentered = true;
          res.budget = budget;
        }
        if (res.report.accepted) break;
      }
    }
    if (res.report.accepted) {
      res.status = AnalysisStatus::accepted;
      break;
    }
    if (out_of_time() ||
        (!have_level && first.status == SolveStatus::unknown)) {
      res.status = AnalysisStatus::unknown;
      break;
    }
    // Residual check failed: retry with a wider margin.
    res.status = AnalysisStatus::rejected;
    eps *= options.eps_growth;
  }
  res.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

}  // namespace pwqlyap
