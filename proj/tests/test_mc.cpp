#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "slr/io.hpp"
#include "slr/mc.hpp"

namespace slr {
namespace {

ExperimentGrid small_grid() {
  ExperimentGrid g;
  g.n_values = {20, 30};
  g.d_values = {1};
  g.snr_exponents = {2.0, 4.0, 6.0};
  g.trials_per_cell = 15;
  g.master_seed = 77;
  return g;
}

std::string trials_csv(const GridResult& r) {
  std::ostringstream out;
  write_trials_csv(out, r.records);
  return out.str();
}

RunOptions options(unsigned threads, std::optional<std::uint64_t> order = std::nullopt) {
  RunOptions o;
  o.threads = threads;
  o.shuffle_order = order;
  return o;
}

CellSummary row(double exponent, double rate) {
  CellSummary s;
  s.cell = {100, 1, exponent};
  s.trials = 10;
  s.recovery_rate = rate;
  return s;
}

TEST(Trial, NoiselessCellRecovers) {
  const Cell cell{40, 1, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < 10; ++i) {
    const TrialRecord r = run_trial(cell, i, 5);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(r.overlap, 1.0);
  }
}

TEST(Trial, Deterministic) {
  const Cell cell{25, 1, 3.0};
  const TrialRecord a = run_trial(cell, 4, 99), b = run_trial(cell, 4, 99);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.exact, b.exact);
  EXPECT_EQ(a.overlap, b.overlap);
  EXPECT_EQ(a.residual_sq, b.residual_sq);
  EXPECT_NE(run_trial(cell, 5, 99).seed, a.seed);
}

TEST(Trial, HighSnrRecovery) {
  ExperimentGrid g;
  g.n_values = {50};
  g.snr_exponents = {6.0};
  g.trials_per_cell = 100;
  const GridResult r = run_grid(g);
  EXPECT_GE(r.summary.at(0).recovery_rate, 0.9);
}

TEST(Trial, BudgetRefusalIsRecorded) {
  SolverConfig solver;
  solver.solver = Solver::brute_force;
  solver.brute_force_cap = 5;
  const TrialRecord r = run_trial({8, 1, 4.0}, 0, 1, solver);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.exact);
  EXPECT_TRUE(std::isnan(r.residual_sq));
}

TEST(Trial, NetSearchCell) {
  SolverConfig solver;
  solver.net_budget = 2e4;
  const TrialRecord r = run_trial({30, 2, std::numeric_limits<double>::infinity()}, 0, 3, solver);
  EXPECT_FALSE(r.failed);
  EXPECT_GE(r.overlap, 0.0);
  EXPECT_LE(r.overlap, 1.0);
}

TEST(Grid, SingleTrialSummary) {
  ExperimentGrid g;
  g.n_values = {10};
  g.snr_exponents = {5.0};
  g.trials_per_cell = 1;
  const GridResult r = run_grid(g);
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.summary[0].recovery_rate, r.records[0].exact ? 1.0 : 0.0);
  EXPECT_EQ(r.summary[0].mean_overlap, r.records[0].overlap);
  EXPECT_EQ(r.summary[0].overlap_se, 0.0);
}

TEST(Grid, OrderAndWorkerIndependence) {
  const ExperimentGrid g = small_grid();
  const GridResult base = run_grid(g, options(1));
  const GridResult shuffled = run_grid(g, options(1, 12345));
  const GridResult parallel = run_grid(g, options(4, 9));
  EXPECT_EQ(trials_csv(base), trials_csv(shuffled));
  EXPECT_EQ(trials_csv(base), trials_csv(parallel));
  EXPECT_EQ(base.summary, parallel.summary);
}

TEST(Grid, RecordInvariants) {
  const GridResult r = run_grid(small_grid());
  EXPECT_EQ(r.records.size(), 2u * 3u * 15u);
  for (const TrialRecord& rec : r.records) {
    EXPECT_GE(rec.overlap, 0.0);
    EXPECT_LE(rec.overlap, 1.0);
    if (rec.exact) {
      EXPECT_EQ(rec.overlap, 1.0);
    }
    EXPECT_EQ(rec.wall_time_ms, 0.0);
  }
  EXPECT_EQ(summarize(r.records), r.summary);
  for (const CellSummary& s : r.summary) {
    EXPECT_GE(s.recovery_rate, 0.0);
    EXPECT_LE(s.recovery_rate, 1.0);
    EXPECT_DOUBLE_EQ(s.recovery_se, std::sqrt(s.recovery_rate * (1 - s.recovery_rate) / double(s.trials)));
  }
  EXPECT_TRUE(monotonicity_violations(r.summary, Metric::recovery).empty());
}

TEST(Grid, ProgressCallback) {
  std::size_t calls = 0, last = 0;
  RunOptions opt;
  opt.threads = 2;
  opt.progress = [&](std::size_t done, std::size_t total) {
    ++calls;
    last = done;
    EXPECT_EQ(total, 90u);
  };
  run_grid(small_grid(), opt);
  EXPECT_EQ(calls, 90u);
  EXPECT_EQ(last, 90u);
}

TEST(Grid, Validation) {
  ExperimentGrid g = small_grid();
  g.snr_exponents = {3.0, 2.0};
  EXPECT_THROW(run_grid(g), InvalidArgument);
  g = small_grid();
  g.d_values = {25};
  EXPECT_THROW(run_grid(g), DimensionError);
  g = small_grid();
  g.trials_per_cell = 0;
  EXPECT_THROW(run_grid(g), InvalidArgument);
}

TEST(Grid, WorkBudgetRefusal) {
  ExperimentGrid g = small_grid();
  g.max_work = 1000.0;
  try {
    run_grid(g);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_NEAR(e.estimate(), estimate_grid_work(g), 1e-6);
    EXPECT_GT(e.estimate(), 1000.0);
  }
}

TEST(Transition, InterpolatesCrossing) {
  const GridSummary s{row(2, 0), row(3, 0), row(4, 1), row(5, 1)};
  const auto t = estimate_transition(s, 0.5);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_TRUE(t[0].found);
  EXPECT_DOUBLE_EQ(t[0].exponent, 3.5);
  EXPECT_EQ(t[0].lower, 3.0);
  EXPECT_EQ(t[0].upper, 4.0);
}

TEST(Transition, NotFound) {
  EXPECT_FALSE(estimate_transition({row(2, 1), row(3, 1), row(4, 1)})[0].found);
  EXPECT_FALSE(estimate_transition({row(2, 0.1), row(3, 0.2)})[0].found);
}

TEST(Transition, LinearInterpolation) {
  const auto t = estimate_transition({row(1, 0.2), row(2, 0.4), row(3, 0.8)}, 0.5);
  EXPECT_DOUBLE_EQ(t[0].exponent, 2.25);
}

TEST(Monotonicity, FlagsDropsBeyondSlack) {
  CellSummary a = row(1, 0.9), b = row(2, 0.5);
  a.recovery_se = 0.05;
  b.recovery_se = 0.05;
  EXPECT_EQ(monotonicity_violations({a, b}, Metric::recovery).size(), 1u);
  b.recovery_rate = 0.8;
  EXPECT_TRUE(monotonicity_violations({a, b}, Metric::recovery).empty());
}

TEST(Seeds, CellsAreIndependentlyReproducible) {
  const Cell c{50, 1, 3.5};
  ExperimentGrid g;
  g.n_values = {50};
  g.snr_exponents = {2.0, 3.5};
  g.trials_per_cell = 3;
  g.master_seed = 8;
  const GridResult r = run_grid(g);
  EXPECT_EQ(r.records[4].seed, trial_seed(8, c, 1));
  EXPECT_EQ(r.records[4].residual_sq, run_trial(c, 1, 8).residual_sq);
}

}  // namespace
}  // namespace slr
