#include <gtest/gtest.h>

#include "pwqlyap/bench.hpp"
#include "pwqlyap/feas.hpp"
#include "support.hpp"

using namespace pwqlyap;
using namespace pwqlyap::testing;

namespace {

// Growth rate of |A^k v| for a fixed start vector, a lower-tech estimate of
// the spectral radius.
double power_growth(const Matrix& A, int k = 400) {
  Vector v = Vector::Ones(A.rows());
  double log_norm = 0.0;
  for (int t = 0; t < k; ++t) {
    v = A * v;
    const double n = v.norm();
    if (n == 0.0) return 0.0;
    log_norm += std::log(n);
    v /= n;
  }
  return std::exp(log_norm / k);
}

}  // namespace

TEST(Partition, EveryShapeIsDisjointAndCovering) {
  for (int d = 1; d <= 4; ++d) {
    for (int cells = 1; cells <= 4; ++cells) {
      GenParams p;
      p.d = d;
      p.cells = cells;
      p.seed = static_cast<std::uint64_t>(10 * d + cells);
      const PwaSystem s = generate_system(p);
      ASSERT_EQ(s.size(), static_cast<std::size_t>(cells));
      EXPECT_TRUE(cells_disjoint(s).empty()) << d << ' ' << cells;
      const SystemCheck c = check_generated(s, p, 2000);
      EXPECT_TRUE(c.partition_ok) << d << ' ' << cells;
      EXPECT_EQ(c.coverage, 1.0);
      EXPECT_TRUE(c.stable_ok);
    }
  }
}

TEST(Partition, SingleCellHasOnlyInputRows) {
  GenParams p;
  p.cells = 1;
  std::mt19937_64 rng(1);
  const auto cells = random_partition(p, rng);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].n_strict(), 0);
  EXPECT_EQ(cells[0].Tw(), rows({{0, 0, 1}, {0, 0, -1}}));
}

TEST(Generate, DeterministicPerSeed) {
  GenParams p;
  p.seed = 99;
  EXPECT_EQ(system_to_json(generate_system(p)), system_to_json(generate_system(p)));
  GenParams q = p;
  q.seed = 100;
  EXPECT_NE(system_to_json(generate_system(p)), system_to_json(generate_system(q)));
}

TEST(Generate, ShapeOfSystem) {
  GenParams p;
  p.d = 3;
  p.init_bound = 2.0;
  p.input_bound = 0.5;
  const PwaSystem s = generate_system(p);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.d, 3);
  EXPECT_EQ(s.m, 1);
  EXPECT_TRUE(s.init.contains(vec({2, -2, 2, 0.5})));
  EXPECT_FALSE(s.init.contains(vec({2.1, 0, 0, 0})));
  EXPECT_FALSE(s.input.contains(vec({0.6})));
}

TEST(Stability, RescalesOnlyWhenNeeded) {
  Matrix A = 2.0 * Matrix::Identity(2, 2);
  enforce_stable(A, 0.9);
  EXPECT_NEAR(spectral_radius(A), 0.9 * (1 - 1e-6), 1e-12);
  EXPECT_LT(spectral_radius(A), 0.9);
  Matrix Z = Matrix::Zero(3, 3);
  enforce_stable(Z, 0.9);
  EXPECT_EQ(Z, Matrix(Matrix::Zero(3, 3)));
  Matrix S = 0.5 * Matrix::Identity(2, 2);
  enforce_stable(S, 0.9);
  EXPECT_EQ(S, Matrix(0.5 * Matrix::Identity(2, 2)));
  // Rotation by 90 degrees scaled by 3: complex eigenvalues.
  Matrix R = rows({{0, -3}, {3, 0}});
  EXPECT_NEAR(spectral_radius(R), 3.0, 1e-12);
}

TEST(Stability, RandomLawsAreStableProperty) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    GenParams p;
    p.d = 1 + t % 4;
    p.scale = 1.0 + t % 3;
    const AffineLaw l = random_stable_law(p, rng);
    EXPECT_LT(spectral_radius(l.A), 1.0);
    EXPECT_LE(power_growth(l.A), p.rho + 0.05) << t;
    EXPECT_EQ(l.B.rows(), p.d);
    EXPECT_EQ(l.b.size(), p.d);
  }
}

TEST(Generate, ValidateRejectsBadParameters) {
  auto bad = [](auto edit) {
    GenParams p;
    edit(p);
    return p;
  };
  EXPECT_THROW(bad([](GenParams& p) { p.d = 0; }).validate(), ModelError);
  EXPECT_THROW(bad([](GenParams& p) { p.d = 5; }).validate(), ModelError);
  EXPECT_THROW(bad([](GenParams& p) { p.m = 2; }).validate(), ModelError);
  EXPECT_THROW(bad([](GenParams& p) { p.cells = 5; }).validate(), ModelError);
  EXPECT_THROW(bad([](GenParams& p) { p.rho = 1.0; }).validate(), ModelError);
  EXPECT_THROW(bad([](GenParams& p) { p.scale = 0; }).validate(), ModelError);
  EXPECT_THROW(bad([](GenParams& p) { p.init_bound = -1; }).validate(), ModelError);
  EXPECT_NO_THROW(GenParams{}.validate());
}

TEST(Generate, OverlapIsDetectedByCheck) {
  GenParams p;
  p.cells = 2;
  PwaSystem s = generate_system(p);
  s.cells[1] = s.cells[0];
  EXPECT_FALSE(check_generated(s, p, 500).partition_ok);
}

TEST(Batch, EmptyBatch) {
  BatchOptions o;
  o.n = 0;
  const BatchSummary s = run_batch(o);
  EXPECT_TRUE(s.items.empty());
  EXPECT_EQ(s.success_rate(), 0.0);
}

TEST(Batch, DeterministicAcrossWorkers) {
  BatchOptions o;
  o.n = 4;
  o.seed = 3;
  o.params.d = 2;
  o.params.cells = 2;
  o.timeout = 20;
  const BatchSummary a = run_batch(o);
  o.workers = 2;
  const BatchSummary b = run_batch(o);
  ASSERT_EQ(a.items.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.items[i].index, static_cast<int>(i));
    EXPECT_EQ(a.items[i].seed, b.items[i].seed);
    EXPECT_EQ(a.items[i].d, b.items[i].d);
    EXPECT_EQ(a.items[i].cells, b.items[i].cells);
    // Wall-clock limits may cut a shared-core run short; compare the rest.
    if (a.items[i].status != AnalysisStatus::unknown &&
        b.items[i].status != AnalysisStatus::unknown) {
      EXPECT_EQ(a.items[i].status, b.items[i].status);
    }
    EXPECT_GE(a.items[i].d, 1);
    EXPECT_LE(a.items[i].d, 2);
    EXPECT_TRUE(a.items[i].check.partition_ok);
  }
  EXPECT_EQ(a.partition_ok, 4);
  const auto report = nlohmann::ordered_json::parse(batch_report_json(a));
  EXPECT_EQ(report["items"].size(), 4u);
}
