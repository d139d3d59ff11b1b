#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pwqlyap/certificate.hpp"
#include "pwqlyap/feas.hpp"
#include "pwqlyap/model.hpp"

namespace pwqlyap {

/// V_i(x, u) <= alpha for the cell i containing (x, u). Throws ModelError
/// when no cell contains the point and PartitionError when several do.
bool sublevel_membership(const Certificate& cert, const PwaSystem& system,
                         const Vector& x, const Vector& u);

/// Rejection sampler over a bounded polyhedron, drawing uniformly from its
/// bounding box.
class PolytopeSampler {
 public:
  explicit PolytopeSampler(const Polyhedron& poly, int max_tries = 100000);

  const Box& box() const { return box_; }
  // nullopt after max_tries rejected draws.
  std::optional<Vector> sample(std::mt19937_64& rng) const;

 private:
  Polyhedron poly_;
  Box box_;
  int max_tries_;
};

struct InputPolicy {
  enum class Kind { constant, uniform, sequence };
  Kind kind = Kind::constant;
  Vector value;                  // constant
  std::uint64_t seed = 0;        // uniform
  std::vector<Vector> values;    // sequence, one per visited point

  static InputPolicy constant(Vector u);
  static InputPolicy uniform(std::uint64_t seed);
  static InputPolicy sequence(std::vector<Vector> us);
};

struct TrajectoryPoint {
  int k = 0;
  std::size_t cell = 0;
  Vector x;
  Vector u;
};

enum class StopReason { steps_exhausted, no_cell };

const char* to_string(StopReason r);

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  StopReason reason = StopReason::steps_exhausted;
};

/// Visits (x_0, u_0), ..., (x_steps, u_steps), stopping early when a state
/// leaves the partition. Throws ModelError when (x_0, u_0) is outside every
/// cell or a sequence policy runs short.
Trajectory simulate(const PwaSystem& system, const Vector& x0,
                    const InputPolicy& policy, int steps);

enum class ViolationKind { sublevel, norm, partition };

const char* to_string(ViolationKind k);

struct Violation {
  int trial = 0;
  int k = 0;
  ViolationKind kind = ViolationKind::sublevel;
  int cell = -1;
  double excess = 0.0;  // amount over the allowed value
};

struct AuditReport {
  int trials = 0;
  int steps = 0;
  long points = 0;
  // Trials whose initial point could not be drawn from X0.
  int skipped = 0;
  std::vector<Violation> violations;

  long count(ViolationKind kind) const;
  void merge(const AuditReport& other);
};

inline constexpr double kAuditTol = 1e-6;

/// Draws `trials` initial points from X0 and input sequences uniform over U,
/// simulates `steps` steps each and checks V_i(z) <= alpha and |z|^2 <= beta
/// at every visited point, with slack kAuditTol * (1 + |(1, z)|^2). Points
/// leaving the partition are violations too. Trial t uses its own generator
/// seeded from (seed, t).
AuditReport audit(const Certificate& cert, const PwaSystem& system,
                  int trials, int steps, std::uint64_t seed);

/// [-sqrt(beta), sqrt(beta)] for each of the d + m coordinates.
std::vector<std::pair<double, double>> state_bounds(const Certificate& cert);

/// CSV rows "kind,index,cell,z1..zn,value": trajectory points (value =
/// V - alpha when a certificate is given, else empty) followed by a grid of
/// samples over the first two coordinates of z (others held at zero) with
/// V_i - alpha for the containing cell.
void write_plot_data(std::ostream& out, const PwaSystem& system,
                     const Trajectory& traj, const Certificate* cert,
                     int grid = 41);

}  // namespace pwqlyap
