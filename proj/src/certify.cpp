#include "pwqlyap/certify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pwqlyap/json_io.hpp"

namespace pwqlyap {

namespace {

std::size_t containing_cell(const PwaSystem& system, const Vector& x,
                            const Vector& u) {
  const auto i = cell_of(system, x, u);
  if (!i) throw ModelError("point lies outside every cell");
  return *i;
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

bool sublevel_membership(const Certificate& cert, const PwaSystem& system,
                         const Vector& x, const Vector& u) {
  const std::size_t i = containing_cell(system, x, u);
  return cert.value(i, join(x, u)) <= cert.alpha;
}

PolytopeSampler::PolytopeSampler(const Polyhedron& poly, int max_tries)
    : poly_(poly), max_tries_(max_tries) {
  auto box = bounding_box(poly);
  if (!box) throw ModelError("cannot sample an empty or unbounded polyhedron");
  box_ = std::move(*box);
}

std::optional<Vector> PolytopeSampler::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = box_.lo.size();
  Vector z(n);
  for (int t = 0; t < max_tries_; ++t) {
    for (Eigen::Index k = 0; k < n; ++k) {
      z(k) = box_.lo(k) + unit(rng) * (box_.hi(k) - box_.lo(k));
    }
    if (poly_.contains(z)) return z;
  }
  return std::nullopt;
}

InputPolicy InputPolicy::constant(Vector u) {
  InputPolicy p;
  p.kind = Kind::constant;
  p.value = std::move(u);
  return p;
}

InputPolicy InputPolicy::uniform(std::uint64_t seed) {
  InputPolicy p;
  p.kind = Kind::uniform;
  p.seed = seed;
  return p;
}

InputPolicy InputPolicy::sequence(std::vector<Vector> us) {
  InputPolicy p;
  p.kind = Kind::sequence;
  p.values = std::move(us);
  return p;
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::steps_exhausted: return "steps exhausted";
    case StopReason::no_cell: return "no containing cell";
  }
  return "?";
}

Trajectory simulate(const PwaSystem& system, const Vector& x0,
                    const InputPolicy& policy, int steps) {
  if (x0.size() != system.d) throw ModelError("x0 has the wrong dimension");
  if (steps < 0) throw ModelError("negative step count");
  std::optional<PolytopeSampler> sampler;
  std::mt19937_64 rng(policy.seed);
  if (policy.kind == InputPolicy::Kind::uniform) sampler.emplace(system.input);
  if (policy.kind == InputPolicy::Kind::sequence &&
      policy.values.size() < static_cast<std::size_t>(steps) + 1) {
    throw ModelError("input sequence shorter than steps + 1");
  }

  Trajectory traj;
  Vector x = x0;
  for (int k = 0; k <= steps; ++k) {
    Vector u;
    switch (policy.kind) {
      case InputPolicy::Kind::constant: u = policy.value; break;
      case InputPolicy::Kind::sequence:
        u = policy.values[static_cast<std::size_t>(k)];
        break;
      case InputPolicy::Kind::uniform: {
        auto s = sampler->sample(rng);
        if (!s) throw ModelError("could not sample the input polytope");
        u = std::move(*s);
        break;
      }
    }
    if (u.size() != system.m) throw ModelError("input has the wrong dimension");
    const auto i = cell_of(system, x, u);
    if (!i) {
      if (k == 0) throw ModelError("initial point lies outside every cell");
      traj.reason = StopReason::no_cell;
      return traj;
    }
    traj.points.push_back({k, *i, x, u});
    if (k < steps) x = step(system, *i, x, u);
  }
  traj.reason = StopReason::steps_exhausted;
  return traj;
}

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::sublevel: return "sublevel";
    case ViolationKind::norm: return "norm";
    case ViolationKind::partition: return "partition";
  }
  return "?";
}

long AuditReport::count(ViolationKind kind) const {
  return std::count_if(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
}

void AuditReport::merge(const AuditReport& other) {
  trials += other.trials;
  steps = std::max(steps, other.steps);
  points += other.points;
  skipped += other.skipped;
  violations.insert(violations.end(), other.violations.begin(),
                    other.violations.end());
}

AuditReport audit(const Certificate& cert, const PwaSystem& system,
                  int trials, int steps, std::uint64_t seed) {
  AuditReport report;
  report.steps = steps;
  if (trials <= 0) return report;
  if (cert.P.size() != system.size()) {
    throw ModelError("certificate and system have different cell counts");
  }
  const PolytopeSampler init(system.init);
  const PolytopeSampler inputs(system.input);
  const int d = system.d;

  for (int t = 0; t < trials; ++t) {
    AuditReport one;
    one.trials = 1;
    std::mt19937_64 rng = trial_rng(seed, static_cast<std::uint64_t>(t));
    const auto z0 = init.sample(rng);
    std::vector<Vector> us;
    if (z0) {
      us.push_back(z0->tail(system.m));
      for (int k = 0; k < steps; ++k) {
        auto u = inputs.sample(rng);
        if (!u) break;
        us.push_back(std::move(*u));
      }
    }
    if (!z0 || us.size() != static_cast<std::size_t>(steps) + 1) {
      ++report.skipped;
      report.trials += 1;
      continue;
    }
    const Vector x0 = z0->head(d);
    if (!cell_of(system, x0, us[0])) {
      one.violations.push_back({t, 0, ViolationKind::partition, -1, 0.0});
      report.merge(one);
      continue;
    }
    const Trajectory traj =
        simulate(system, x0, InputPolicy::sequence(std::move(us)), steps);
    for (const TrajectoryPoint& p : traj.points) {
      ++one.points;
      const Vector z = join(p.x, p.u);
      const double scale = kAuditTol * (2.0 + z.squaredNorm());
      const double v = cert.value(p.cell, z) - cert.alpha;
      if (v > scale) {
        one.violations.push_back({t, p.k, ViolationKind::sublevel,
                                  static_cast<int>(p.cell), v});
      }
      const double n = z.squaredNorm() - cert.beta;
      if (n > scale) {
        one.violations.push_back({t, p.k, ViolationKind::norm,
                                  static_cast<int>(p.cell), n});
      }
    }
    if (traj.reason == StopReason::no_cell) {
      one.violations.push_back({t, static_cast<int>(traj.points.size()),
                                ViolationKind::partition, -1, 0.0});
    }
    report.merge(one);
  }
  report.steps = steps;
  return report;
}

std::vector<std::pair<double, double>> state_bounds(const Certificate& cert) {
  if (cert.P.empty()) throw ModelError("certificate has no cells");
  if (!(cert.beta >= 0.0)) throw ModelError("beta must be nonnegative");
  const double r = std::sqrt(cert.beta);
  return std::vector<std::pair<double, double>>(
      static_cast<std::size_t>(cert.P.front().rows()), {-r, r});
}

void write_plot_data(std::ostream& out, const PwaSystem& system,
                     const Trajectory& traj, const Certificate* cert,
                     int grid) {
  const int n = system.dim();
  out << "kind,index,cell";
  for (int k = 0; k < system.d; ++k) out << ",x" << k + 1;
  for (int k = 0; k < system.m; ++k) out << ",u" << k + 1;
  out << ",value\n";
  auto row = [&](const char* kind, long index, std::size_t cell,
                 const Vector& z, const double* value) {
    out << kind << ',' << index << ',' << cell;
    for (int k = 0; k < n; ++k) out << ',' << format_double(z(k));
    out << ',';
    if (value) out << format_double(*value);
    out << '\n';
  };
  for (const TrajectoryPoint& p : traj.points) {
    const Vector z = join(p.x, p.u);
    if (cert) {
      const double v = cert->value(p.cell, z) - cert->alpha;
      row("trajectory", p.k, p.cell, z, &v);
    } else {
      row("trajectory", p.k, p.cell, z, nullptr);
    }
  }
  if (!cert || n < 2 || grid < 2) return;
  const double r = std::sqrt(std::max(cert->beta, 0.0));
  if (r == 0.0) return;
  long index = 0;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      Vector z = Vector::Zero(n);
      z(0) = -r + 2.0 * r * a / (grid - 1);
      z(1) = -r + 2.0 * r * b / (grid - 1);
      const auto i = cell_of(system, z.head(system.d), z.tail(system.m));
      if (!i) continue;
      const double v = cert->value(*i, z) - cert->alpha;
      row("level", index++, *i, z, &v);
    }
  }
}

}  // namespace pwqlyap
