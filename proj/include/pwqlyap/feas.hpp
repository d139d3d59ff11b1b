#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pwqlyap/lp.hpp"
#include "pwqlyap/model.hpp"

namespace pwqlyap {

/// Multipliers proving {y | E_s y >> 0, E_w y >= 0} empty:
///   E_s' p_strict + E_w' p_weak = 0, p >= 0, sum(p_strict) = 1.
struct MotzkinCertificate {
  Vector p_strict;
  Vector p_weak;

  // Largest violation among the equality, normalisation and sign conditions.
  double violation(const QuadMatrix& q) const;
  bool valid_for(const QuadMatrix& q, double tol = 1e-8) const {
    return violation(q) <= tol;
  }
};

enum class Emptiness { empty, nonempty, unknown };

struct EmptinessResult {
  Emptiness verdict = Emptiness::unknown;
  std::optional<MotzkinCertificate> certificate;  // set when empty
};

/// Decides emptiness of the strict/weak system encoded by q via the
/// alternative system. The leading (1, 0...0) row is part of the strict
/// index set. An LP `unknown` or a certificate failing its own check yields
/// Emptiness::unknown.
EmptinessResult decide_emptiness(const QuadMatrix& q,
                                 const LpOptions& options = {});

struct SwitchDecision {
  bool fireable = true;
  Emptiness verdict = Emptiness::unknown;
  std::optional<MotzkinCertificate> certificate;
};

/// Fireability of i -> j. Only a verified alternative-system certificate
/// prunes a switch; an inconclusive LP keeps it.
SwitchDecision decide_switch(const PwaSystem& system, std::size_t i,
                             std::size_t j);
bool switch_fireable(const PwaSystem& system, std::size_t i, std::size_t j);

class SwitchGraph {
 public:
  explicit SwitchGraph(std::size_t n = 0)
      : n_(n), decisions_(n * n) {}

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const {
    return decisions_[i * n_ + j].fireable;
  }
  const SwitchDecision& decision(std::size_t i, std::size_t j) const {
    return decisions_[i * n_ + j];
  }
  SwitchDecision& decision(std::size_t i, std::size_t j) {
    return decisions_[i * n_ + j];
  }
  std::size_t fireable_count() const;

 private:
  std::size_t n_;
  std::vector<SwitchDecision> decisions_;
};

SwitchGraph build_switch_graph(const PwaSystem& system);

/// True unless the LP proves X0 and cell i disjoint.
bool init_intersects_cell(const PwaSystem& system, std::size_t i);

/// Pairs (i, j), i < j, whose cells are not proven disjoint.
std::vector<std::pair<std::size_t, std::size_t>> cells_disjoint(
    const PwaSystem& system);

/// Every coordinate of the input polytope is bounded above and below. A
/// coordinate is unbounded iff the closure has a recession direction with a
/// nonzero component there.
bool input_bounded(const PwaSystem& system);

struct Box {
  Vector lo;
  Vector hi;
};

/// Axis-aligned box containing the closure of `poly`, found by bisection on
/// feasibility LPs and rounded outward by `tol`. nullopt when the polyhedron
/// is empty or unbounded (or a bound exceeds `limit`).
std::optional<Box> bounding_box(const Polyhedron& poly, double tol = 1e-9,
                                double limit = 1e12);

}  // namespace pwqlyap
