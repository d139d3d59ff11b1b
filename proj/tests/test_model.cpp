#include <gtest/gtest.h>

#include <random>

#include "pwqlyap/model.hpp"
#include "support.hpp"

using namespace pwqlyap;
using namespace pwqlyap::testing;

namespace {

AffineLaw law(Matrix A, Matrix B, Vector b) { return {std::move(A), std::move(B), std::move(b)}; }

Polyhedron weak_only(Matrix Tw, Vector cw) {
  return Polyhedron(Matrix(0, Tw.cols()), Vector(0), std::move(Tw), std::move(cw));
}

// Independent row builder: one constraint at a time, as (c, -t).
struct RowBuilder {
  std::vector<Vector> strict;
  std::vector<Vector> weak;
  void add(const Matrix& T, const Vector& c, bool is_strict) {
    for (Eigen::Index r = 0; r < T.rows(); ++r) {
      Vector row(1 + T.cols());
      row(0) = c(r);
      for (Eigen::Index k = 0; k < T.cols(); ++k) row(1 + k) = -T(r, k);
      (is_strict ? strict : weak).push_back(row);
    }
  }
  Matrix build(int cols) const {
    Matrix E(static_cast<Eigen::Index>(1 + strict.size() + weak.size()), cols);
    E.row(0).setZero();
    E(0, 0) = 1.0;
    Eigen::Index r = 1;
    for (const auto& s : strict) E.row(r++) = s.transpose();
    for (const auto& w : weak) E.row(r++) = w.transpose();
    return E;
  }
};

}  // namespace

TEST(Homogenize, RunningExampleF1) {
  const AffineLaw l = law(rows({{0.4217, 0.1077}, {0.1162, 0.2785}}),
                          rows({{0.5661}, {0.2235}}), vec({0, -1}));
  const Matrix F = homogenize(l, 2, 1).F;
  const Matrix expected = rows({{1, 0, 0, 0},
                                {0, 0.4217, 0.1077, 0.5661},
                                {-1, 0.1162, 0.2785, 0.2235},
                                {0, 0, 0, 1}});
  EXPECT_EQ(F, expected);
}

TEST(Homogenize, ZeroAndIdentityLaws) {
  EXPECT_EQ(homogenize(law(Matrix::Zero(1, 1), Matrix::Zero(1, 1), Vector::Zero(1)), 1, 1).F,
            rows({{1, 0, 0}, {0, 0, 0}, {0, 0, 1}}));
  EXPECT_EQ(homogenize(law(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Vector::Zero(2)), 2, 1).F,
            Matrix(Matrix::Identity(4, 4)));
}

TEST(Homogenize, DimensionMismatchThrows) {
  EXPECT_THROW(homogenize(law(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Vector::Zero(2)), 2, 2),
               ModelError);
}

TEST(Homogenize, StructureInvariants) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 4;
    const int m = 1 + t % 2;
    AffineLaw l{Matrix::Random(d, d), Matrix::Random(d, m), Vector::Random(d)};
    const Matrix F = homogenize(l, d, m).F;
    EXPECT_EQ(F.row(0), Vector::Unit(1 + d + m, 0).transpose());
    EXPECT_EQ(F.bottomRightCorner(m, m), Matrix(Matrix::Identity(m, m)));
    EXPECT_TRUE(F.bottomLeftCorner(m, 1 + d).isZero(0));
  }
}

TEST(Homogenize, ConsistentWithStepProperty) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const int d = 1 + t % 4;
    const int m = 1 + (t / 4) % 2;
    PwaSystem sys;
    sys.d = d;
    sys.m = m;
    sys.laws.push_back({uniform_vector(rng, d * d, -2, 2).reshaped(d, d),
                        uniform_vector(rng, d * m, -2, 2).reshaped(d, m),
                        uniform_vector(rng, d, -5, 5)});
    const Vector x = uniform_vector(rng, d, -10, 10);
    const Vector u = uniform_vector(rng, m, -3, 3);
    const Vector image = homogenize(sys.laws[0], d, m).F * lift(x, u);
    Vector expected(1 + d + m);
    expected << 1.0, step(sys, 0, x, u), u;
    EXPECT_LE((image - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CellQuadratization, RunningExampleE1) {
  const QuadMatrix q = cell_quadratization(running().cells[0]);
  EXPECT_EQ(q.E, rows({{1, 0, 0, 0}, {5, 9, -7, -6}, {4, 4, -8, 8}, {3, 0, 0, -1}, {3, 0, 0, 1}}));
  EXPECT_EQ(q.n_strict, 3);
}

TEST(CellQuadratization, WeakHalfLine) {
  const QuadMatrix q = cell_quadratization(weak_only(rows({{1}}), vec({1})));
  EXPECT_EQ(q.E, rows({{1, 0}, {1, -1}}));
  EXPECT_EQ(q.n_strict, 1);
}

TEST(CellQuadratization, EmptyBlocks) {
  const QuadMatrix q = cell_quadratization(Polyhedron::whole_space(3));
  EXPECT_EQ(q.E, rows({{1, 0, 0, 0}}));
  EXPECT_EQ(q.n_weak(), 0);
}

TEST(SwitchQuadratization, RunningExample2To1) {
  const PwaSystem& s = running();
  const QuadMatrix q = switch_quadratization(s.cells[1], s.laws[1], s.cells[0]);
  // Reference rows to the printed 4 decimals. The two image rows follow
  // the row order of the target cell, the reverse of the printed listing.
  const Matrix strict = rows({{5, 9, -7, -6},
                              {-58, 3.3662, -2.1732, 1.1084},
                              {-68, 0.8532, -2.5748, 10.446}});
  const Matrix weak = rows({{-4, -4, 8, -8}, {3, 0, 0, -1}, {3, 0, 0, 1}});
  ASSERT_EQ(q.n_strict, 4);
  EXPECT_EQ(q.E.row(0), Vector::Unit(4, 0).transpose());
  EXPECT_LE((q.E.middleRows(1, 3) - strict).cwiseAbs().maxCoeff(), 5e-4);
  // Our weak block also carries the image of the input rows (u <= 3 again).
  ASSERT_EQ(q.n_weak(), 5);
  EXPECT_LE((q.E.middleRows(4, 3) - weak).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(q.E.row(7), q.E.row(5));
  EXPECT_EQ(q.E.row(8), q.E.row(6));
}

TEST(SwitchQuadratization, IdentityLawDuplicatesRows) {
  const Polyhedron X(rows({{1, -1}}), vec({2}), rows({{0, 1}, {0, -1}}), vec({1, 1}));
  const AffineLaw id{Matrix::Identity(1, 1), Matrix::Zero(1, 1), Vector::Zero(1)};
  const QuadMatrix q = switch_quadratization(X, id, X);
  const QuadMatrix c = cell_quadratization(X);
  EXPECT_EQ(q.n_strict, 3);
  EXPECT_EQ(q.E.row(1), q.E.row(2));
  EXPECT_EQ(q.E.row(1), c.E.row(1));
  EXPECT_EQ(q.E.middleRows(3, 2), q.E.middleRows(5, 2));
}

TEST(SwitchQuadratization, SampledImagesAreNonnegative) {
  std::mt19937_64 rng(3);
  for (int sys_i = 0; sys_i < 5; ++sys_i) {
    const Polyhedron Xi(uniform_vector(rng, 2, -1, 1).transpose(), vec({0.5}),
                        rows({{0, 1}, {0, -1}}), vec({1, 1}));
    const Polyhedron Xj(uniform_vector(rng, 2, -1, 1).transpose(), vec({0.3}),
                        rows({{0, 1}, {0, -1}}), vec({1, 1}));
    const AffineLaw l{uniform_vector(rng, 1, -1, 1), uniform_vector(rng, 1, -1, 1),
                      uniform_vector(rng, 1, -1, 1)};
    const QuadMatrix q = switch_quadratization(Xi, l, Xj);
    int hits = 0;
    for (int t = 0; t < 1000; ++t) {
      Vector z = uniform_vector(rng, 2, -3, 3);
      z(1) = std::clamp(z(1), -1.0, 1.0);
      Vector image(2);
      image << l.A(0, 0) * z(0) + l.B(0, 0) * z(1) + l.b(0), z(1);
      if (!Xi.contains(z) || !Xj.contains(image)) continue;
      ++hits;
      const Vector e = q.E * lift(z.head(1), z.tail(1));
      EXPECT_GE(e.minCoeff(), -1e-12);
      EXPECT_GT(e.head(q.n_strict).minCoeff(), 0.0);
    }
    EXPECT_GT(hits, 0);
  }
}

TEST(InitQuadratization, RunningBoxAndCell1) {
  const PwaSystem& s = running();
  const QuadMatrix q = init_quadratization(s.init, s.cells[0]);
  RowBuilder b;
  b.add(s.init.Ts(), s.init.cs(), true);
  b.add(s.cells[0].Ts(), s.cells[0].cs(), true);
  b.add(s.init.Tw(), s.init.cw(), false);
  b.add(s.cells[0].Tw(), s.cells[0].cw(), false);
  EXPECT_EQ(q.E.rows(), 11);  // leading + 2 strict + 6 box + 2 input rows
  EXPECT_EQ(q.E, b.build(4));
  EXPECT_EQ(q.n_strict, 3);
}

TEST(InitQuadratization, WholeSpace) {
  const QuadMatrix q = init_quadratization(Polyhedron::whole_space(2), Polyhedron::whole_space(2));
  EXPECT_EQ(q.E, rows({{1, 0, 0}}));
}

TEST(InitQuadratization, SelfIntersectionSamples) {
  const PwaSystem& s = running();
  const QuadMatrix q = init_quadratization(s.cells[0], s.cells[0]);
  EXPECT_EQ(q.E.middleRows(1, 2), q.E.middleRows(3, 2));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 1000; ++t) {
    const Vector z = uniform_vector(rng, 3, -3, 3);
    if (!s.cells[0].contains(z)) continue;
    EXPECT_GE((q.E * lift(z.head(2), z.tail(1))).minCoeff(), 0.0);
  }
}

TEST(Quadratization, SoundForNonnegativeMultipliersProperty) {
  const PwaSystem& s = running();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const QuadMatrix q = cell_quadratization(s.cells[i]);
    for (int t = 0; t < 200; ++t) {
      Matrix W(q.rows(), q.rows());
      for (int r = 0; r < q.rows(); ++r) {
        for (int c = r; c < q.rows(); ++c) W(r, c) = W(c, r) = w(rng);
      }
      const Vector z = uniform_vector(rng, 3, -9, 9);
      if (!s.cells[i].contains(z)) continue;
      const Vector e = q.E * lift(z.head(2), z.tail(1));
      EXPECT_GE(e.dot(W * e), -1e-9 * (1.0 + e.squaredNorm()));
    }
  }
}

TEST(Quadratization, LeadingRowEffect) {
  const Matrix E = rows({{1, 0}, {1, -1}});
  const Matrix M = rows({{1, -1}});
  // W = [[w1, w3], [w3, w2]] with w1 = w2 = 0, w3 > 0.
  const Matrix W = rows({{0, 0.7}, {0.7, 0}});
  for (double x = -5; x <= 5; x += 0.125) {
    const Vector y = vec({1, x});
    EXPECT_EQ(y.dot(E.transpose() * W * E * y) >= 0, x <= 1) << x;
    EXPECT_GE(y.dot(M.transpose() * Matrix::Constant(1, 1, 0.7) * M * y), 0.0);
  }
}

TEST(Step, RunningExampleAndZeroLaw) {
  EXPECT_EQ(step(running(), 0, vec({0, 0}), vec({0})), vec({0, -1}));
  PwaSystem z;
  z.d = 2;
  z.m = 1;
  z.laws.push_back({Matrix::Zero(2, 2), Matrix::Zero(2, 1), Vector::Zero(2)});
  EXPECT_EQ(step(z, 0, vec({3, 4}), vec({1})), vec({0, 0}));
  EXPECT_THROW(step(z, 1, vec({3, 4}), vec({1})), ModelError);
}

TEST(CellOf, RunningExample) {
  EXPECT_EQ(cell_of(running(), vec({0, 0}), vec({0})), std::optional<std::size_t>(0));
  EXPECT_EQ(cell_of(running(), vec({0, 0}), vec({5})), std::nullopt);
}

TEST(CellOf, PartitionOnSampledBox) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const Vector x = uniform_vector(rng, 2, -9, 9);
    const Vector u = uniform_vector(rng, 1, -3, 3);
    EXPECT_TRUE(cell_of(running(), x, u).has_value());
  }
}

TEST(CellOf, BoundaryPointsUseExactComparison) {
  // On both hyperplanes: only the cell with two weak rows contains it.
  EXPECT_EQ(cell_of(running(), vec({-1, 0}), vec({0})), std::optional<std::size_t>(3));
}

TEST(CellOf, OverlapIsReported) {
  PwaSystem s;
  s.d = 1;
  s.m = 0;
  s.cells = {weak_only(rows({{1}}), vec({1})), weak_only(rows({{-1}}), vec({0}))};
  try {
    cell_of(s, vec({0.5}), Vector(0));
    FAIL() << "expected PartitionError";
  } catch (const PartitionError& e) {
    EXPECT_EQ(e.cells(), (std::vector<std::size_t>{0, 1}));
  }
}

TEST(Polyhedron, StrictAndWeakMembership) {
  const Polyhedron p(rows({{1}}), vec({1}), rows({{-1}}), vec({0}));
  EXPECT_TRUE(p.contains(vec({0})));
  EXPECT_FALSE(p.contains(vec({1})));
  EXPECT_FALSE(p.contains(vec({-1e-300})));
  EXPECT_THROW(Polyhedron(rows({{1}}), vec({1, 2}), Matrix(0, 1), Vector(0)), ModelError);
  EXPECT_EQ(Polyhedron(Matrix(0, 0), Vector(0), rows({{1, 2}}), vec({1})).dim(), 2);
}

TEST(PwaSystem, ValidateShapes) {
  PwaSystem s = running();
  EXPECT_NO_THROW(s.validate());
  s.laws.pop_back();
  EXPECT_THROW(s.validate(), ModelError);
}
