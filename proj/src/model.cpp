#include "pwqlyap/model.hpp"

#include <sstream>

namespace pwqlyap {

Polyhedron::Polyhedron(Matrix Ts, Vector cs, Matrix Tw, Vector cw)
    : Ts_(std::move(Ts)), cs_(std::move(cs)), Tw_(std::move(Tw)),
      cw_(std::move(cw)) {
  if (Ts_.rows() != cs_.size() || Tw_.rows() != cw_.size()) {
    throw ModelError("polyhedron: row count of T does not match length of c");
  }
  if (Ts_.cols() != Tw_.cols()) {
    // An empty block carries no column information of its own.
    if (Ts_.rows() == 0) {
      Ts_.resize(0, Tw_.cols());
    } else if (Tw_.rows() == 0) {
      Tw_.resize(0, Ts_.cols());
    } else {
      throw ModelError("polyhedron: strict and weak blocks differ in width");
    }
  }
}

Polyhedron Polyhedron::whole_space(int dim) {
  return Polyhedron(Matrix(0, dim), Vector(0), Matrix(0, dim), Vector(0));
}

bool Polyhedron::contains(const Vector& z) const {
  if (z.size() != dim()) {
    throw ModelError("polyhedron: point has wrong dimension");
  }
  for (int r = 0; r < n_strict(); ++r) {
    if (!(Ts_.row(r).dot(z) < cs_(r))) return false;
  }
  for (int r = 0; r < n_weak(); ++r) {
    if (!(Tw_.row(r).dot(z) <= cw_(r))) return false;
  }
  return true;
}

namespace {

void check_law(const AffineLaw& law, int d, int m) {
  if (law.A.rows() != d || law.A.cols() != d || law.B.rows() != d ||
      law.B.cols() != m || law.b.size() != d) {
    std::ostringstream os;
    os << "affine law has shape A " << law.A.rows() << "x" << law.A.cols()
       << ", B " << law.B.rows() << "x" << law.B.cols() << ", b "
       << law.b.size() << "; expected d=" << d << ", m=" << m;
    throw ModelError(os.str());
  }
}

// [c, -T] rows of a constraint block.
Matrix affine_rows(const Matrix& T, const Vector& c) {
  Matrix rows(T.rows(), 1 + T.cols());
  rows.col(0) = c;
  rows.rightCols(T.cols()) = -T;
  return rows;
}

Matrix leading_row(int n) {
  Matrix r = Matrix::Zero(1, 1 + n);
  r(0, 0) = 1.0;
  return r;
}

QuadMatrix stack(const std::vector<Matrix>& strict,
                 const std::vector<Matrix>& weak, int cols) {
  int ns = 0;
  int nw = 0;
  for (const auto& s : strict) ns += static_cast<int>(s.rows());
  for (const auto& w : weak) nw += static_cast<int>(w.rows());
  QuadMatrix q;
  q.E.resize(ns + nw, cols);
  q.n_strict = ns;
  int r = 0;
  for (const auto& s : strict) {
    q.E.middleRows(r, s.rows()) = s;
    r += static_cast<int>(s.rows());
  }
  for (const auto& w : weak) {
    q.E.middleRows(r, w.rows()) = w;
    r += static_cast<int>(w.rows());
  }
  return q;
}

}  // namespace

HomogeneousLaw homogenize(const AffineLaw& law, int d, int m) {
  check_law(law, d, m);
  const int n = 1 + d + m;
  HomogeneousLaw h;
  h.F = Matrix::Zero(n, n);
  h.F(0, 0) = 1.0;
  h.F.block(1, 0, d, 1) = law.b;
  h.F.block(1, 1, d, d) = law.A;
  h.F.block(1, 1 + d, d, m) = law.B;
  h.F.block(1 + d, 1 + d, m, m).setIdentity();
  return h;
}

void PwaSystem::validate() const {
  if (d < 0 || m < 0) throw ModelError("negative dimension");
  if (cells.empty()) throw ModelError("system has no cells");
  if (cells.size() != laws.size()) {
    throw ModelError("number of cells and laws differ");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].dim() != dim()) {
      throw ModelError("cell " + std::to_string(i) + " has wrong dimension");
    }
    check_law(laws[i], d, m);
  }
  if (input.dim() != m) throw ModelError("input polytope has wrong dimension");
  if (init.dim() != dim()) throw ModelError("init polyhedron has wrong dimension");
}

QuadMatrix cell_quadratization(const Polyhedron& cell) {
  const int n = cell.dim();
  return stack({leading_row(n), affine_rows(cell.Ts(), cell.cs())},
               {affine_rows(cell.Tw(), cell.cw())}, 1 + n);
}

QuadMatrix switch_quadratization(const Polyhedron& from, const AffineLaw& law,
                                 const Polyhedron& to) {
  const int d = static_cast<int>(law.A.rows());
  const int m = static_cast<int>(law.B.cols());
  const int n = d + m;
  if (from.dim() != n || to.dim() != n) {
    throw ModelError("switch quadratization: dimension mismatch");
  }
  check_law(law, d, m);

  // Linear part G = [[A, B], [0, Id]] and offset (b; 0) of the map on z.
  Matrix G = Matrix::Zero(n, n);
  G.topLeftCorner(d, d) = law.A;
  G.topRightCorner(d, m) = law.B;
  G.bottomRightCorner(m, m).setIdentity();
  Vector offset = Vector::Zero(n);
  offset.head(d) = law.b;

  auto image = [&](const Matrix& T, const Vector& c) {
    return affine_rows(T * G, c - T * offset);
  };
  return stack({leading_row(n), affine_rows(from.Ts(), from.cs()),
                image(to.Ts(), to.cs())},
               {affine_rows(from.Tw(), from.cw()), image(to.Tw(), to.cw())},
               1 + n);
}

QuadMatrix init_quadratization(const Polyhedron& init, const Polyhedron& cell) {
  const int n = cell.dim();
  if (init.dim() != n) {
    throw ModelError("init quadratization: dimension mismatch");
  }
  return stack({leading_row(n), affine_rows(init.Ts(), init.cs()),
                affine_rows(cell.Ts(), cell.cs())},
               {affine_rows(init.Tw(), init.cw()),
                affine_rows(cell.Tw(), cell.cw())},
               1 + n);
}

Vector join(const Vector& x, const Vector& u) {
  Vector z(x.size() + u.size());
  z << x, u;
  return z;
}

Vector lift(const Vector& x, const Vector& u) {
  Vector h(1 + x.size() + u.size());
  h << 1.0, x, u;
  return h;
}

Vector step(const PwaSystem& system, std::size_t i, const Vector& x,
            const Vector& u) {
  if (i >= system.laws.size()) {
    throw ModelError("step: cell index " + std::to_string(i) +
                     " out of range");
  }
  const AffineLaw& law = system.laws[i];
  if (x.size() != system.d || u.size() != system.m) {
    throw ModelError("step: state or input has wrong dimension");
  }
  return law.A * x + law.B * u + law.b;
}

std::optional<std::size_t> cell_of(const PwaSystem& system, const Vector& x,
                                   const Vector& u) {
  const Vector z = join(x, u);
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < system.cells.size(); ++i) {
    if (system.cells[i].contains(z)) hits.push_back(i);
  }
  if (hits.empty()) return std::nullopt;
  if (hits.size() > 1) {
    std::ostringstream os;
    os << "point lies in several cells:";
    for (auto h : hits) os << ' ' << h;
    throw PartitionError(hits, os.str());
  }
  return hits.front();
}

}  // namespace pwqlyap
