#include "pwqlyap/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <Eigen/Eigenvalues>
#include "json.hpp"

#include "pwqlyap/feas.hpp"
#include "pwqlyap/json_io.hpp"

namespace pwqlyap {

namespace {

Matrix uniform_matrix(int rows, int cols, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) M(r, c) = dist(rng);
  }
  return M;
}

std::uint64_t item_seed(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct Hyperplane {
  Vector a;  // over (x, u)
  double c;  // a z < c on the strict side
};

Polyhedron make_cell(const std::vector<std::pair<Hyperplane, bool>>& sides,
                     const Polyhedron& input_rows) {
  int ns = 0;
  int nw = 0;
  for (const auto& [h, strict] : sides) (strict ? ns : nw) += 1;
  const Eigen::Index n = input_rows.dim();
  const int ni = input_rows.n_weak();
  Matrix Ts(ns, n);
  Vector cs(ns);
  Matrix Tw(nw + ni, n);
  Vector cw(nw + ni);
  int s = 0;
  int w = 0;
  for (const auto& [h, strict] : sides) {
    if (strict) {
      Ts.row(s) = h.a.transpose();
      cs(s++) = h.c;
    } else {
      Tw.row(w) = -h.a.transpose();
      cw(w++) = -h.c;
    }
  }
  Tw.bottomRows(ni) = input_rows.Tw();
  cw.tail(ni) = input_rows.cw();
  return Polyhedron(Ts, cs, Tw, cw);
}

}  // namespace

void GenParams::validate() const {
  if (d < 1 || d > 4) throw ModelError("dimension must be in [1, 4]");
  if (m != 1) throw ModelError("generated systems have a single input");
  if (cells < 1 || cells > 4) throw ModelError("cell count must be in [1, 4]");
  if (!(scale > 0.0)) throw ModelError("scale must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ModelError("rho must be in (0, 1)");
  if (!(input_bound > 0.0 && init_bound > 0.0)) {
    throw ModelError("bounds must be positive");
  }
}

std::vector<Polyhedron> random_partition(const GenParams& params,
                                         std::mt19937_64& rng) {
  params.validate();
  const int n = params.d + params.m;
  // Input range rows -u_k <= b, u_k <= b lifted to (x, u).
  Matrix Tin = Matrix::Zero(2 * params.m, n);
  for (int k = 0; k < params.m; ++k) {
    Tin(2 * k, params.d + k) = 1.0;
    Tin(2 * k + 1, params.d + k) = -1.0;
  }
  const Polyhedron input_rows(Matrix(0, n), Vector(0), Tin,
                              Vector::Constant(2 * params.m, params.input_bound));
  auto draw = [&]() {
    Hyperplane h;
    h.a = uniform_matrix(n, 1, 1.0, rng).col(0);
    h.c = std::uniform_real_distribution<double>(-params.scale,
                                                 params.scale)(rng);
    return h;
  };
  std::vector<Polyhedron> cells;
  if (params.cells == 1) {
    cells.push_back(make_cell({}, input_rows));
    return cells;
  }
  const Hyperplane h1 = draw();
  if (params.cells == 2) {
    cells.push_back(make_cell({{h1, true}}, input_rows));
    cells.push_back(make_cell({{h1, false}}, input_rows));
    return cells;
  }
  const Hyperplane h2 = draw();
  if (params.cells == 4) {
    cells.push_back(make_cell({{h1, true}, {h2, true}}, input_rows));
    cells.push_back(make_cell({{h1, true}, {h2, false}}, input_rows));
  } else {
    cells.push_back(make_cell({{h1, true}}, input_rows));
  }
  cells.push_back(make_cell({{h1, false}, {h2, true}}, input_rows));
  cells.push_back(make_cell({{h1, false}, {h2, false}}, input_rows));
  return cells;
}

double spectral_radius(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void enforce_stable(Matrix& A, double rho) {
  const double r = spectral_radius(A);
  if (r >= rho) A *= rho / r * (1.0 - 1e-6);
}

AffineLaw random_stable_law(const GenParams& params, std::mt19937_64& rng) {
  params.validate();
  AffineLaw law;
  law.A = uniform_matrix(params.d, params.d, params.scale, rng);
  enforce_stable(law.A, params.rho);
  law.B = uniform_matrix(params.d, params.m, params.scale, rng);
  law.b = uniform_matrix(params.d, 1, params.scale, rng).col(0);
  return law;
}

PwaSystem generate_system(const GenParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  PwaSystem sys;
  sys.d = params.d;
  sys.m = params.m;
  sys.cells = random_partition(params, rng);
  for (std::size_t i = 0; i < sys.cells.size(); ++i) {
    sys.laws.push_back(random_stable_law(params, rng));
  }
  Matrix Tu(2 * params.m, params.m);
  for (int k = 0; k < params.m; ++k) {
    Tu.row(2 * k) = Vector::Unit(params.m, k).transpose();
    Tu.row(2 * k + 1) = -Vector::Unit(params.m, k).transpose();
  }
  sys.input = Polyhedron(Matrix(0, params.m), Vector(0), Tu,
                         Vector::Constant(2 * params.m, params.input_bound));
  const int n = params.d + params.m;
  Matrix Ti(2 * n, n);
  Vector ci(2 * n);
  for (int k = 0; k < n; ++k) {
    Ti.row(2 * k) = Vector::Unit(n, k).transpose();
    Ti.row(2 * k + 1) = -Vector::Unit(n, k).transpose();
    const double b = k < params.d ? params.init_bound : params.input_bound;
    ci(2 * k) = b;
    ci(2 * k + 1) = b;
  }
  sys.init = Polyhedron(Matrix(0, n), Vector(0), Ti, ci);
  sys.validate();
  return sys;
}

SystemCheck check_generated(const PwaSystem& system, const GenParams& params,
                            int samples) {
  SystemCheck out;
  out.stable_ok = std::all_of(
      system.laws.begin(), system.laws.end(),
      [](const AffineLaw& law) { return spectral_radius(law.A) < 1.0; });
  const bool disjoint = cells_disjoint(system).empty();
  std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  const double R = 10.0 * params.init_bound;
  std::uniform_real_distribution<double> xs(-R, R);
  std::uniform_real_distribution<double> us(-params.input_bound,
                                            params.input_bound);
  int hit = 0;
  bool ambiguous = false;
  for (int s = 0; s < samples; ++s) {
    Vector x(system.d);
    Vector u(system.m);
    for (int k = 0; k < system.d; ++k) x(k) = xs(rng);
    for (int k = 0; k < system.m; ++k) u(k) = us(rng);
    try {
      if (cell_of(system, x, u)) ++hit;
    } catch (const PartitionError&) {
      ambiguous = true;
    }
  }
  out.coverage = samples > 0 ? static_cast<double>(hit) / samples : 1.0;
  out.partition_ok = disjoint && !ambiguous && out.coverage >= 0.999;
  return out;
}

double BatchSummary::success_rate() const {
  return items.empty() ? 0.0
                       : static_cast<double>(accepted) /
                             static_cast<double>(items.size());
}

BatchSummary run_batch(const BatchOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  BatchSummary summary;
  const int n = std::max(options.n, 0);
  summary.items.resize(static_cast<std::size_t>(n));
  std::atomic<int> next{0};

  auto work = [&]() {
    for (int i = next++; i < n; i = next++) {
      BatchItem& item = summary.items[static_cast<std::size_t>(i)];
      const auto start = std::chrono::steady_clock::now();
      item.index = i;
      item.seed = item_seed(options.seed, i);
      try {
        GenParams p = options.params;
        p.seed = item.seed;
        if (options.vary_shape) {
          std::mt19937_64 shape_rng(item.seed ^ 0x5bd1e995ULL);
          p.d = std::uniform_int_distribution<int>(1, p.d)(shape_rng);
          p.cells = std::uniform_int_distribution<int>(1, p.cells)(shape_rng);
        }
        item.d = p.d;
        item.cells = p.cells;
        const PwaSystem sys = generate_system(p);
        item.check = check_generated(sys, p);
        AnalyzeOptions ao = options.analyze;
        ao.time_limit = options.timeout;
        const AnalysisResult res = analyze(sys, ao);
        item.status = res.status;
        item.objective = res.solution.objective;
        item.message = res.status == AnalysisStatus::accepted
                           ? std::string()
                           : res.report.reason.empty() ? res.solution.message
                                                       : res.report.reason;
      } catch (const std::exception& e) {
        item.status = AnalysisStatus::unknown;
        item.message = e.what();
      }
      item.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    }
  };
  const int workers = std::clamp(options.workers, 1, std::max(n, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const BatchItem& item : summary.items) {
    summary.accepted += item.status == AnalysisStatus::accepted;
    summary.partition_ok += item.check.partition_ok;
    summary.stable_ok += item.check.stable_ok;
  }
  summary.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  return summary;
}

std::string batch_report_json(const BatchSummary& summary) {
  nlohmann::ordered_json j;
  j["n"] = summary.items.size();
  j["accepted"] = summary.accepted;
  j["success_rate"] = summary.success_rate();
  j["partition_ok"] = summary.partition_ok;
  j["stable_ok"] = summary.stable_ok;
  j["seconds"] = summary.seconds;
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const BatchItem& item : summary.items) {
    nlohmann::ordered_json e;
    e["index"] = item.index;
    e["seed"] = item.seed;
    e["d"] = item.d;
    e["cells"] = item.cells;
    e["status"] = to_string(item.status);
    e["objective"] = std::isfinite(item.objective) ? item.objective : 0.0;
    e["seconds"] = item.seconds;
    e["partition_ok"] = item.check.partition_ok;
    e["coverage"] = item.check.coverage;
    e["stable_ok"] = item.check.stable_ok;
    e["message"] = item.message;
    items.push_back(std::move(e));
  }
  j["items"] = std::move(items);
  return canonical_json(j);
}

}  // namespace pwqlyap
