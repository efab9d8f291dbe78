#include <gtest/gtest.h>

#include <sstream>

#include "slr/io.hpp"

namespace slr {
namespace {

TEST(Json, InstanceRoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ModelConfig c;
    c.n = 9;
    c.d = 2;
    c.snr = 3.3;
    c.beta_direction = BetaDirection::random_sphere;
    const Instance a = generate(c, seed);
    const Instance b = instance_from_json(json::parse(to_json(a).dump()));
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.w, b.w);
    EXPECT_EQ(a.beta_star, b.beta_star);
    EXPECT_EQ(a.pi_star, b.pi_star);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.seed, b.seed);
  }
}

TEST(Json, NoiselessInstanceSnr) {
  ModelConfig c;
  c.n = 4;
  c.snr = kNoiseless;
  EXPECT_EQ(to_json(generate(c, 1))["snr"], "inf");
}

TEST(Json, InstanceSizeChecks) {
  json j = {{"n", 2}, {"d", 1}, {"X", {{1.0}, {2.0}}}, {"y", {1.0}}};
  EXPECT_THROW(instance_from_json(j), DimensionError);
  j["y"] = {1.0, 2.0};
  const Instance inst = instance_from_json(j);
  EXPECT_TRUE(inst.pi_star.is_identity());
  j.erase("X");
  EXPECT_THROW(instance_from_json(j), InvalidArgument);
}

TEST(Json, EstimateFields) {
  Estimate e;
  e.pi_hat = Permutation::from_map({1, 0, 3, 2});
  e.beta_hat = Eigen::Vector2d(0.5, -1.0);
  e.residual_sq = 0.25;
  e.qap_objective = 3.0;
  e.solver = Solver::net_search;
  e.stats.candidates = 12;
  e.stats.net = NetSpec{Eigen::Vector2d::Zero(), 1.0, 0.5, 100.0};
  const json j = to_json(e);
  EXPECT_EQ(j["pi_hat"], json({2, 1, 4, 3}));
  EXPECT_EQ(j["solver"], "net_search");
  EXPECT_EQ(j["beta_hat"][1], -1.0);
  EXPECT_EQ(j["stats"]["candidates"], 12);
  EXPECT_DOUBLE_EQ(j["stats"]["net"]["cardinality_bound"].get<double>(), 25.0);
}

TEST(Config, ModelKeys) {
  const ModelConfig c = model_config_from_json(
      json::parse(R"({"n": 50, "d": 2, "snr_exponent": 3.5, "beta_norm": 2, "beta_direction": "random_sphere"})"));
  EXPECT_EQ(c.n, 50u);
  EXPECT_EQ(c.d, 2u);
  EXPECT_DOUBLE_EQ(*c.snr_exponent, 3.5);
  EXPECT_EQ(c.beta_direction, BetaDirection::random_sphere);
  EXPECT_EQ(model_config_from_json(json::parse(R"({"n": 5, "sigma": 0})")).effective_snr(), kNoiseless);
  EXPECT_DOUBLE_EQ(model_config_from_json(json::parse(R"({"n": 5, "sigma": 0.5})")).effective_snr(), 4.0);
  EXPECT_EQ(model_config_from_json(json::parse(R"({"n": 3, "pi_law": "fixed", "fixed_pi": [3,1,2]})")).fixed_pi,
            Permutation::from_map({2, 0, 1}));
  EXPECT_THROW(model_config_from_json(json::parse(R"({"n": 5, "snr": 1, "sigma": 1})")), InvalidArgument);
  EXPECT_THROW(model_config_from_json(json::parse(R"({"n": 5, "colour": 1})")), InvalidArgument);
  EXPECT_THROW(model_config_from_json(json::parse(R"({"n": 5, "pi_law": "sorted"})")), InvalidArgument);
}

TEST(Config, Grid) {
  const ExperimentGrid g = grid_from_json(json::parse(R"({
    "n_values": [100], "snr_exponents": [2, 2.5, "inf"], "trials_per_cell": 7,
    "solver": {"name": "exact-d1"}, "master_seed": 18446744073709551615})"));
  EXPECT_EQ(g.n_values, std::vector<std::size_t>{100});
  EXPECT_EQ(g.d_values, std::vector<std::size_t>{1});
  EXPECT_TRUE(std::isinf(g.snr_exponents.back()));
  EXPECT_EQ(g.trials_per_cell, 7u);
  EXPECT_EQ(g.solver.solver, Solver::exact_d1);
  EXPECT_EQ(g.master_seed, 18446744073709551615ULL);
  EXPECT_THROW(grid_from_json(json::parse(R"({"n_values": [10], "snr_exponents": [3, 1]})")), InvalidArgument);
  EXPECT_THROW(grid_from_json(json::parse(R"({"n_values": [10], "snr_exponents": [1], "trials": 3})")),
               InvalidArgument);
}

TEST(Csv, Formats) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.5), "2.5");
  EXPECT_EQ(format_double(1e4), "10000");
  EXPECT_EQ(csv_cell("1:2,3:1"), "\"1:2,3:1\"");
  EXPECT_EQ(csv_cell("plain"), "plain");
}

TEST(Csv, TrialsAndSummaryLayout) {
  TrialRecord r;
  r.cell = {10, 1, 2.5};
  r.trial_index = 3;
  r.seed = 42;
  r.exact = true;
  r.overlap = 1.0;
  r.residual_sq = 0.1;
  std::ostringstream trials, summary;
  write_trials_csv(trials, {r});
  EXPECT_EQ(trials.str(),
            "n,d,snr_exponent,trial,seed,exact,overlap,residual_sq,wall_time_ms\n"
            "10,1,2.5,3,42,1,1,0.10000000000000001,0\n");
  write_summary_csv(summary, summarize({r}));
  EXPECT_EQ(summary.str(),
            "n,d,snr_exponent,trials,recovery_rate,recovery_se,mean_overlap,overlap_se\n"
            "10,1,2.5,1,1,0,1,0\n");
}

TEST(Csv, TransitionJson) {
  Transition t;
  t.n = 100;
  t.d = 1;
  t.found = true;
  t.exponent = 3.5;
  t.lower = 3;
  t.upper = 4;
  const json j = to_json(t);
  EXPECT_EQ(j["metric"], "recovery_rate");
  EXPECT_EQ(j["bracket"], json({3.0, 4.0}));
  t.found = false;
  EXPECT_FALSE(to_json(t).contains("exponent"));
}

}  // namespace
}  // namespace slr
