#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pwqlyap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a point lies in two or more cells of what should be a partition.
class PartitionError : public std::runtime_error {
 public:
  PartitionError(std::vector<std::size_t> cells, const std::string& what)
      : std::runtime_error(what), cells_(std::move(cells)) {}
  const std::vector<std::size_t>& cells() const { return cells_; }

 private:
  std::vector<std::size_t> cells_;
};

/// Convex polyhedron {z | Ts z << cs, Tw z <= cw}, mixing strict and weak
/// rows. Either block may have zero rows; the column count is the ambient
/// dimension and is kept even when both blocks are empty.
class Polyhedron {
 public:
  Polyhedron() = default;
  Polyhedron(Matrix Ts, Vector cs, Matrix Tw, Vector cw);

  static Polyhedron whole_space(int dim);

  int dim() const { return static_cast<int>(Ts_.cols()); }
  int n_strict() const { return static_cast<int>(Ts_.rows()); }
  int n_weak() const { return static_cast<int>(Tw_.rows()); }

  const Matrix& Ts() const { return Ts_; }
  const Vector& cs() const { return cs_; }
  const Matrix& Tw() const { return Tw_; }
  const Vector& cw() const { return cw_; }

  // Exact comparisons, no tolerance: strict rows use <, weak rows use <=.
  bool contains(const Vector& z) const;

 private:
  Matrix Ts_ = Matrix(0, 0);
  Vector cs_ = Vector(0);
  Matrix Tw_ = Matrix(0, 0);
  Vector cw_ = Vector(0);
};

/// x' = A x + B u + b
struct AffineLaw {
  Matrix A;
  Matrix B;
  Vector b;
};

/// (1+d+m)-square matrix acting on (1, x, u). The input block copies u
/// forward unchanged.
struct HomogeneousLaw {
  Matrix F;
};

HomogeneousLaw homogenize(const AffineLaw& law, int d, int m);

struct PwaSystem {
  int d = 0;
  int m = 0;
  std::vector<Polyhedron> cells;
  std::vector<AffineLaw> laws;
  Polyhedron input;  // over u alone
  Polyhedron init;   // over (x, u)

  int dim() const { return d + m; }
  std::size_t size() const { return cells.size(); }

  // Checks shapes only. Disjointness and input boundedness need LPs and are
  // checked in feas.hpp.
  void validate() const;
};

/// Rows of E are ordered: the (1, 0...0) row when present, then the strict
/// rows, then the weak rows. The first n_strict rows must stay strictly
/// positive on the underlying set; the rest only nonnegative.
struct QuadMatrix {
  Matrix E;
  int n_strict = 0;

  int rows() const { return static_cast<int>(E.rows()); }
  int n_weak() const { return rows() - n_strict; }
  auto strict_block() const { return E.topRows(n_strict); }
  auto weak_block() const { return E.bottomRows(n_weak()); }
};

QuadMatrix cell_quadratization(const Polyhedron& cell);

/// Quadratization of {z in from | law(z) in to}. The image rows pull the
/// constraints of `to` back through the homogeneous law.
QuadMatrix switch_quadratization(const Polyhedron& from, const AffineLaw& law,
                                 const Polyhedron& to);

QuadMatrix init_quadratization(const Polyhedron& init, const Polyhedron& cell);

/// Stacks z = (x, u).
Vector join(const Vector& x, const Vector& u);

/// Homogeneous coordinates (1, x, u).
Vector lift(const Vector& x, const Vector& u);

Vector step(const PwaSystem& system, std::size_t i, const Vector& x,
            const Vector& u);

/// Index of the unique cell containing (x, u), or nullopt when no cell does.
/// Throws PartitionError when several cells contain the point.
std::optional<std::size_t> cell_of(const PwaSystem& system, const Vector& x,
                                   const Vector& u);

}  // namespace pwqlyap
