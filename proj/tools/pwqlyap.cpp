// Command-line front end. Exit codes: 0 success / certificate accepted,
// 1 inconclusive analysis or failed audit, 2 usage or input error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pwqlyap/bench.hpp"
#include "pwqlyap/certificate.hpp"
#include "pwqlyap/certify.hpp"
#include "pwqlyap/frontend.hpp"
#include "pwqlyap/json_io.hpp"
#include "pwqlyap/sdpa.hpp"

namespace {

using namespace pwqlyap;
using Json = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kInconclusive = 1;
constexpr int kInputError = 2;

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

struct ParseArgs {
  std::string input;
  std::string output;
};

int run_parse(const ParseArgs& a) {
  const LoopProgram prog = parse_program(read_file(a.input));
  const PwaSystem sys = to_pwa(prog);
  emit(a.output, system_to_json(sys));
  std::cerr << "parsed " << prog.d() << " state variable(s), " << prog.m()
            << " input(s), " << sys.size() << " cell(s)\n";
  return kOk;
}

int run_switches(const std::string& input) {
  const PwaSystem sys = load_system(input);
  const SwitchGraph g = build_switch_graph(sys);
  Json out;
  Json rows = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < g.size(); ++j) row.push_back(g(i, j) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  out["fireable"] = std::move(rows);
  Json pruned = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const SwitchDecision& d = g.decision(i, j);
      if (d.fireable || !d.certificate) continue;
      Json e;
      e["from"] = i;
      e["to"] = j;
      e["p_strict"] = vector_json(d.certificate->p_strict);
      e["p_weak"] = vector_json(d.certificate->p_weak);
      pruned.push_back(std::move(e));
    }
  }
  out["pruned"] = std::move(pruned);
  std::cout << canonical_json(out);
  return kOk;
}

struct AnalyzeArgs {
  std::string input;
  std::string output;
  std::string sdpa;
  double eps = 1e-7;
  double time_limit = 0.0;
  bool verbose = false;
};

int run_analyze(const AnalyzeArgs& a) {
  const PwaSystem sys = load_system(a.input);
  AnalyzeOptions opt;
  opt.eps = a.eps;
  opt.time_limit = a.time_limit;
  opt.solver.verbose = a.verbose;
  if (!a.sdpa.empty()) {
    const ConicProgram prog = assemble_program(sys, build_switch_graph(sys), a.eps);
    write_file_atomic(a.sdpa, to_sdpa(prog.to_sdp_data()));
  }
  const AnalysisResult res = analyze(sys, opt);
  std::fprintf(stderr,
               "status %s: %zu fireable switches, %zu variables, %zu blocks, "
               "%.2f s\n",
               to_string(res.status), res.graph.fireable_count(),
               res.num_vars, res.num_blocks, res.seconds);
  if (res.status != AnalysisStatus::accepted) {
    std::fprintf(stderr, "solver: %s (%s)\n", to_string(res.solution.status),
                 res.solution.message.c_str());
    if (!res.report.reason.empty()) {
      std::fprintf(stderr, "rejected: %s\n", res.report.reason.c_str());
    }
    return kInconclusive;
  }
  const Certificate& c = res.report.certificate;
  std::fprintf(stderr, "alpha %.6f beta %.6f objective %.6f margin %g%s\n",
               c.alpha, c.beta, c.alpha + c.beta, res.eps_used,
               res.recentered ? " (recentered)" : "");
  emit(a.output, certificate_to_json(c));
  return kOk;
}

struct CheckArgs {
  std::string cert;
  std::string system;
  int trials = 10000;
  int steps = 50;
  std::uint64_t seed = 1;
};

int run_check(const CheckArgs& a) {
  const Certificate cert = load_certificate(a.cert);
  const PwaSystem sys = load_system(a.system);
  if (cert.P.size() != sys.size() ||
      (!cert.P.empty() && cert.P.front().rows() != sys.dim())) {
    throw InputError("certificate does not match the system's cells");
  }
  const AuditReport rep = audit(cert, sys, a.trials, a.steps, a.seed);
  Json out;
  out["trials"] = rep.trials;
  out["steps"] = rep.steps;
  out["points"] = rep.points;
  out["skipped"] = rep.skipped;
  out["violations"] = rep.violations.size();
  for (ViolationKind k : {ViolationKind::sublevel, ViolationKind::norm,
                          ViolationKind::partition}) {
    out[std::string(to_string(k))] = rep.count(k);
  }
  Json first = Json::array();
  for (std::size_t k = 0; k < rep.violations.size() && k < 10; ++k) {
    const Violation& v = rep.violations[k];
    Json e;
    e["trial"] = v.trial;
    e["k"] = v.k;
    e["kind"] = to_string(v.kind);
    e["cell"] = v.cell;
    e["excess"] = v.excess;
    first.push_back(std::move(e));
  }
  out["first"] = std::move(first);
  Json bounds = Json::array();
  for (const auto& [lo, hi] : state_bounds(cert)) bounds.push_back(Json::array({lo, hi}));
  out["state_bounds"] = std::move(bounds);
  std::cout << canonical_json(out);
  return rep.violations.empty() ? kOk : kInconclusive;
}

struct SimulateArgs {
  std::string system;
  std::vector<double> x0;
  int steps = 100;
  std::vector<double> u;
  std::uint64_t seed = 0;
  bool random_input = false;
  std::string cert;
  std::string plot;
};

int run_simulate(const SimulateArgs& a) {
  const PwaSystem sys = load_system(a.system);
  if (static_cast<int>(a.x0.size()) != sys.d) {
    throw InputError("--x0 needs " + std::to_string(sys.d) + " value(s)");
  }
  const Vector x0 = Eigen::Map<const Vector>(a.x0.data(), sys.d);
  InputPolicy policy;
  if (a.random_input) {
    policy = InputPolicy::uniform(a.seed);
  } else {
    Vector u = Vector::Zero(sys.m);
    if (!a.u.empty()) {
      if (static_cast<int>(a.u.size()) != sys.m) {
        throw InputError("--u needs " + std::to_string(sys.m) + " value(s)");
      }
      u = Eigen::Map<const Vector>(a.u.data(), sys.m);
    }
    policy = InputPolicy::constant(u);
  }
  const Trajectory traj = simulate(sys, x0, policy, a.steps);
  std::optional<Certificate> cert;
  if (!a.cert.empty()) cert = load_certificate(a.cert);
  std::ostringstream csv;
  write_plot_data(csv, sys, traj, cert ? &*cert : nullptr);
  emit(a.plot, csv.str());
  std::fprintf(stderr, "%zu point(s), stopped: %s\n", traj.points.size(),
               to_string(traj.reason));
  return kOk;
}

struct GenArgs {
  GenParams params;
  std::string output;
};

int run_gen(const GenArgs& a) {
  emit(a.output, system_to_json(generate_system(a.params)));
  return kOk;
}

struct BenchArgs {
  BatchOptions options;
  std::string report;
  bool fixed_shape = false;
};

int run_bench(BenchArgs a) {
  a.options.vary_shape = !a.fixed_shape;
  const BatchSummary s = run_batch(a.options);
  emit(a.report, batch_report_json(s));
  std::fprintf(stderr,
               "%d/%zu accepted (%.1f%%), partition ok %d, stable %d, %.1f s\n",
               s.accepted, s.items.size(), 100.0 * s.success_rate(),
               s.partition_ok, s.stable_ok, s.seconds);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise quadratic invariants for piecewise affine systems"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "Translate a loop program into a system JSON file");
  parse->add_option("file", parse_args.input, "Program source")->required()->check(CLI::ExistingFile);
  parse->add_option("-o,--output", parse_args.output, "Output file (default: stdout)");

  std::string switches_input;
  auto* switches = app.add_subcommand("switches", "Print the fireable switch matrix and pruning certificates");
  switches->add_option("system", switches_input, "System JSON")->required()->check(CLI::ExistingFile);

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Synthesize and verify a certificate");
  analyze_cmd->add_option("system", analyze_args.input, "System JSON")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("-o,--output", analyze_args.output, "Certificate file (default: stdout)");
  analyze_cmd->add_option("--eps", analyze_args.eps, "Margin subtracted from every LMI")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--export-sdpa", analyze_args.sdpa, "Also write the SDP in sparse SDPA format");
  analyze_cmd->add_option("--time-limit", analyze_args.time_limit, "Seconds, 0 for none")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  analyze_cmd->add_flag("-v,--verbose", analyze_args.verbose, "Print solver iterations");

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "Monte-Carlo audit of a certificate");
  check->add_option("certificate", check_args.cert, "Certificate JSON")->required()->check(CLI::ExistingFile);
  check->add_option("system", check_args.system, "System JSON")->required()->check(CLI::ExistingFile);
  check->add_option("--trials", check_args.trials, "Trajectories")->capture_default_str()->check(CLI::NonNegativeNumber);
  check->add_option("--steps", check_args.steps, "Steps per trajectory")->capture_default_str()->check(CLI::NonNegativeNumber);
  check->add_option("--seed", check_args.seed, "Random seed")->capture_default_str();

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate one trajectory");
  sim->add_option("system", sim_args.system, "System JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--x0", sim_args.x0, "Initial state, comma separated")->required()->delimiter(',')->allow_extra_args(false);
  sim->add_option("--steps", sim_args.steps, "Steps")->capture_default_str()->check(CLI::NonNegativeNumber);
  auto* u_opt = sim->add_option("--u", sim_args.u, "Constant input, comma separated (default: zero)")->delimiter(',')->allow_extra_args(false);
  sim->add_option("--seed", sim_args.seed, "Draw inputs uniformly from U with this seed")
      ->excludes(u_opt)
      ->each([&](const std::string&) { sim_args.random_input = true; });
  sim->add_option("--cert", sim_args.cert, "Certificate for level values and contour samples")->check(CLI::ExistingFile);
  sim->add_option("--plot-data", sim_args.plot, "CSV output (default: stdout)");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a random system");
  gen->add_option("--seed", gen_args.params.seed, "Random seed")->capture_default_str();
  gen->add_option("--cells", gen_args.params.cells, "Cells, 1 to 4")->capture_default_str()->check(CLI::Range(1, 4));
  gen->add_option("--dim", gen_args.params.d, "State dimension, 1 to 4")->capture_default_str()->check(CLI::Range(1, 4));
  gen->add_option("--rho", gen_args.params.rho, "Target spectral radius")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  gen->add_option("--scale", gen_args.params.scale, "Coefficient scale")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("-o,--output", gen_args.output, "Output file (default: stdout)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Generate and analyze a batch of random systems");
  bench->add_option("--n", bench_args.options.n, "Systems")->capture_default_str()->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", bench_args.options.seed, "Batch seed")->capture_default_str();
  bench->add_option("--dim", bench_args.options.params.d, "Largest state dimension")->capture_default_str()->check(CLI::Range(1, 4));
  bench->add_option("--cells", bench_args.options.params.cells, "Largest cell count")->capture_default_str()->check(CLI::Range(1, 4));
  bench->add_flag("--fixed-shape", bench_args.fixed_shape, "Use --dim and --cells for every system");
  bench->add_option("--rho", bench_args.options.params.rho, "Target spectral radius")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  bench->add_option("--timeout", bench_args.options.timeout, "Seconds per system")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--workers", bench_args.options.workers, "Concurrent analyses")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--report", bench_args.report, "Report JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*parse) return run_parse(parse_args);
    if (*switches) return run_switches(switches_input);
    if (*analyze_cmd) return run_analyze(analyze_args);
    if (*check) return run_check(check_args);
    if (*sim) return run_simulate(sim_args);
    if (*gen) return run_gen(gen_args);
    if (*bench) return run_bench(bench_args);
  } catch (const ParseError& e) {
    std::cerr << parse_args.input << ':' << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
