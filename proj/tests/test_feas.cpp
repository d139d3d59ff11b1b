#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "pwqlyap/feas.hpp"
#include "support.hpp"

using namespace pwqlyap;
using namespace pwqlyap::testing;

namespace {

Polyhedron interval(double lo, double hi, int m) {
  Matrix Tw = Matrix::Zero(2, m);
  Tw(0, 0) = 1;
  Tw(1, 0) = -1;
  return Polyhedron(Matrix(0, m), Vector(0), Tw, vec({hi, -lo}));
}

}  // namespace

TEST(Lp, FeasiblePointSatisfiesConstraints) {
  const Matrix A = rows({{1, 1, 1}, {1, -1, 0}});
  const Vector b = vec({4, 1});
  const LpResult r = lp_feasible(A, b, Vector::Zero(3));
  ASSERT_EQ(r.status, LpStatus::feasible);
  EXPECT_LE((A * r.point - b).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GE(r.point.minCoeff(), -1e-12);
}

TEST(Lp, InfeasibleReturnsFarkasVector) {
  // x1 + x2 = -1 with x >= 0.
  const Matrix A = rows({{1, 1}});
  const Vector b = vec({-1});
  const Vector lower = Vector::Zero(2);
  const LpResult r = lp_feasible(A, b, lower);
  ASSERT_EQ(r.status, LpStatus::infeasible);
  EXPECT_GT(r.farkas.dot(b - A * lower), 0.0);
  EXPECT_LE((r.farkas.transpose() * A).maxCoeff(), 1e-12);
}

TEST(Lp, FreeVariables) {
  const Matrix A = rows({{1, 1}});
  const LpResult r = lp_feasible(A, vec({-5}), vec({kFree, 0}));
  ASSERT_EQ(r.status, LpStatus::feasible);
  EXPECT_NEAR(r.point.sum(), -5, 1e-9);
}

TEST(Lp, RandomFarkasCertificatesProperty) {
  std::mt19937_64 rng(4);
  int infeasible = 0;
  for (int t = 0; t < 300; ++t) {
    const int rws = 2 + t % 3;
    const int cols = 2 + t % 4;
    const Matrix A = uniform_vector(rng, rws * cols, -1, 1).reshaped(rws, cols);
    const Vector b = uniform_vector(rng, rws, -1, 1);
    const LpResult r = lp_feasible(A, b, Vector::Zero(cols));
    ASSERT_NE(r.status, LpStatus::unknown);
    if (r.status == LpStatus::feasible) {
      EXPECT_LE((A * r.point - b).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_GE(r.point.minCoeff(), -1e-12);
    } else {
      ++infeasible;
      EXPECT_GT(r.farkas.dot(b), 0.0);
      EXPECT_LE((r.farkas.transpose() * A).maxCoeff(), 1e-9);
    }
  }
  EXPECT_GT(infeasible, 0);
}

TEST(Emptiness, RunningSwitchesDecidedQuickly) {
  const PwaSystem& s = running();
  int pruned = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto start = std::chrono::steady_clock::now();
      const SwitchDecision d = decide_switch(s, i, j);
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start).count();
      EXPECT_LT(secs, 1.0);
      EXPECT_NE(d.verdict, Emptiness::unknown);
      if (d.fireable) continue;
      ++pruned;
      ASSERT_TRUE(d.certificate.has_value());
      EXPECT_TRUE(d.certificate->valid_for(
          switch_quadratization(s.cells[i], s.laws[i], s.cells[j])));
    }
  }
  EXPECT_EQ(pruned, 3);
}

TEST(Emptiness, RunningFireableCount) {
  const SwitchGraph g = build_switch_graph(running());
  EXPECT_EQ(g.fireable_count(), 13u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const SwitchDecision& d = g.decision(i, j);
      if (!d.fireable) {
        ASSERT_TRUE(d.certificate.has_value());
        EXPECT_TRUE(d.certificate->valid_for(
            switch_quadratization(running().cells[i], running().laws[i], running().cells[j])));
      }
    }
  }
}

TEST(Emptiness, SampledFireablePairsAreNeverPruned) {
  // A switch observed on a sample must not be pruned.
  const PwaSystem& s = running();
  const SwitchGraph g = build_switch_graph(s);
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20000; ++t) {
    const Vector x = uniform_vector(rng, 2, -20, 20);
    const Vector u = uniform_vector(rng, 1, -3, 3);
    const auto i = cell_of(s, x, u);
    const auto j = cell_of(s, step(s, *i, x, u), u);
    ASSERT_TRUE(i && j);
    EXPECT_TRUE(g(*i, *j)) << *i << "->" << *j;
  }
}

TEST(Emptiness, InitMeetsEveryCell) {
  for (std::size_t i = 0; i < running().size(); ++i) {
    EXPECT_TRUE(init_intersects_cell(running(), i));
  }
}

TEST(Emptiness, InitMissesFarCell) {
  PwaSystem s;
  s.d = 1;
  s.m = 1;
  s.input = interval(-1, 1, 1);
  s.init = Polyhedron(Matrix(0, 2), Vector(0), rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}),
                      vec({1, 1, 1, 1}));
  s.cells = {Polyhedron(Matrix(0, 2), Vector(0), rows({{-1, 0}}), vec({-5}))};
  s.laws = {{Matrix::Zero(1, 1), Matrix::Zero(1, 1), Vector::Zero(1)}};
  EXPECT_FALSE(init_intersects_cell(s, 0));
}

TEST(Emptiness, StrictVersusWeakBoundary) {
  // {x < 0, x >= 0} is empty, {x <= 0, x >= 0} is not.
  const QuadMatrix strict{rows({{1, 0}, {0, -1}, {0, 1}}), 2};
  EXPECT_EQ(decide_emptiness(strict).verdict, Emptiness::empty);
  const QuadMatrix weak{rows({{1, 0}, {0, -1}, {0, 1}}), 1};
  EXPECT_EQ(decide_emptiness(weak).verdict, Emptiness::nonempty);
}

TEST(Emptiness, NoStrictRowsIsNonempty) {
  const QuadMatrix q{rows({{1, 2}, {-1, -2}}), 0};
  EXPECT_EQ(decide_emptiness(q).verdict, Emptiness::nonempty);
}

TEST(Emptiness, CertificateViolationDetectsTampering) {
  const QuadMatrix q{rows({{1, 0}, {0, -1}, {0, 1}}), 2};
  const EmptinessResult r = decide_emptiness(q);
  ASSERT_TRUE(r.certificate);
  MotzkinCertificate bad = *r.certificate;
  bad.p_strict(0) += 0.5;
  EXPECT_FALSE(bad.valid_for(q));
  bad.p_weak = Vector(0);
  EXPECT_EQ(bad.violation(q), std::numeric_limits<double>::infinity());
}

TEST(Partition, RunningCellsDisjointAndInputBounded) {
  EXPECT_TRUE(cells_disjoint(running()).empty());
  EXPECT_TRUE(input_bounded(running()));
}

TEST(Partition, OverlapAndUnboundedInputDetected) {
  PwaSystem s;
  s.d = 1;
  s.m = 1;
  s.cells = {interval(-1, 1, 2), interval(0, 2, 2)};
  s.input = Polyhedron(Matrix(0, 1), Vector(0), rows({{1}}), vec({1}));
  const auto overlaps = cells_disjoint(s);
  ASSERT_EQ(overlaps.size(), 1u);
  EXPECT_EQ(overlaps[0], std::make_pair(std::size_t{0}, std::size_t{1}));
  EXPECT_FALSE(input_bounded(s));
}

TEST(BoundingBox, BoxAndTriangle) {
  const auto box = bounding_box(running().init);
  ASSERT_TRUE(box);
  EXPECT_LE((box->hi - vec({9, 9, 3})).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((box->lo - vec({-9, -9, -3})).cwiseAbs().maxCoeff(), 1e-6);
  // x > 0, y > 0, x + y <= 1 (strict rows are closed).
  const Polyhedron tri(rows({{-1, 0}, {0, -1}}), vec({0, 0}), rows({{1, 1}}), vec({1}));
  const auto t = bounding_box(tri);
  ASSERT_TRUE(t);
  EXPECT_LE((t->hi - vec({1, 1})).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(t->lo.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_GE(t->hi.minCoeff(), 1.0);
}

TEST(BoundingBox, UnboundedAndEmpty) {
  EXPECT_FALSE(bounding_box(Polyhedron(Matrix(0, 1), Vector(0), rows({{1}}), vec({1}))));
  EXPECT_FALSE(bounding_box(interval(2, 1, 1)));
}
