// slr: command-line front end for the shuffled regression solvers.
//
// Exit codes: 0 success, 1 internal or numerical failure, 2 usage error.
// Machine-readable output goes to stdout; errors (as JSON) and progress to
// stderr.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slr/estimators.hpp"
#include "slr/io.hpp"
#include "slr/mc.hpp"
#include "slr/model.hpp"
#include "slr/theory.hpp"

namespace {

using namespace slr;

constexpr std::uint64_t kDefaultSeed = 20240101;

int emit_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

Eigen::VectorXd parse_vector(const std::string& text, const char* what) {
  std::string s = text;
  for (char& c : s)
    if (c == ',' || c == '[' || c == ']') c = ' ';
  std::istringstream in(s);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof() || values.empty()) throw InvalidArgument(std::string("cannot parse ") + what + ": " + text);
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// ---- solve -----------------------------------------------------------------

struct SolveOptions {
  std::string instance_path;
  std::string save_instance;
  std::size_t n = 20;
  std::size_t d = 1;
  std::optional<double> snr, snr_exp, sigma;
  double beta_norm = 1.0;
  std::string beta_direction = "first_axis";
  std::uint64_t seed = kDefaultSeed;
  std::string solver = "auto";
  double net_budget = 1e6;
  std::optional<double> net_radius, net_delta;
  std::string net_center;
  std::size_t max_iters = 100;
  std::size_t brute_cap = kBruteForceCap;
  unsigned threads = 0;
};

int cmd_solve(const SolveOptions& o) {
  Instance inst;
  bool truth_known = true;
  if (!o.instance_path.empty()) {
    const json j = read_json_file(o.instance_path);
    truth_known = j.contains("pi_star");
    inst = instance_from_json(j);
  } else {
    json cfg = {{"n", o.n}, {"d", o.d}, {"beta_norm", o.beta_norm}, {"beta_direction", o.beta_direction}};
    if (o.snr) cfg["snr"] = *o.snr;
    if (o.snr_exp) cfg["snr_exponent"] = *o.snr_exp;
    if (o.sigma) cfg["sigma"] = *o.sigma;
    inst = generate(model_config_from_json(cfg), o.seed);
  }
  if (!o.save_instance.empty()) {
    std::ofstream out(o.save_instance);
    if (!out) throw InvalidArgument("cannot write " + o.save_instance);
    out << to_json(inst).dump(2) << '\n';
  }

  SolverConfig sc;
  if (o.solver != "auto") sc.solver = parse_solver(o.solver);
  sc.net_budget = o.net_budget;
  sc.alt_min_iters = o.max_iters;
  sc.brute_force_cap = o.brute_cap;
  const unsigned threads = o.threads ? o.threads : default_thread_count();

  Estimate est;
  const Solver solver = sc.resolve(inst.d);
  if (solver == Solver::net_search && (o.net_radius || o.net_delta || !o.net_center.empty())) {
    NetSpec net = default_net(inst.X, inst.y, o.net_budget);
    if (!o.net_center.empty()) net.center = parse_vector(o.net_center, "--net-center");
    if (o.net_radius) net.radius = *o.net_radius;
    net.delta = o.net_delta ? *o.net_delta : delta_for_budget(net.radius, inst.d, o.net_budget);
    est = solve_net_search(inst.X, inst.y, net, threads);
  } else {
    est = run_solver(sc, inst.X, inst.y, threads);
  }

  json out = to_json(est);
  out["instance"] = {{"n", inst.n}, {"d", inst.d}, {"seed", inst.seed}, {"sigma", inst.sigma}};
  if (truth_known) {
    out["exact"] = est.pi_hat == inst.pi_star;
    out["overlap"] = overlap(est.pi_hat, inst.pi_star);
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepOptions {
  std::string config;
  std::string out_dir = ".";
  double level = 0.5;
  unsigned threads = 0;
  bool progress = false;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << content;
}

int cmd_sweep(const SweepOptions& o) {
  const ExperimentGrid grid = grid_from_json(read_json_file(o.config));
  RunOptions run;
  run.threads = o.threads;
  if (o.progress)
    run.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 100 == 0) std::cerr << "progress " << done << "/" << total << '\n';
    };
  const GridResult result = run_grid(grid, run);

  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  std::ostringstream trials, summary;
  write_trials_csv(trials, result.records);
  write_summary_csv(summary, result.summary);
  write_file(dir / "trials.csv", trials.str());
  write_file(dir / "summary.csv", summary.str());

  json transitions = json::array();
  for (Metric m : {Metric::recovery, Metric::overlap})
    for (const Transition& t : estimate_transition(result.summary, o.level, m)) transitions.push_back(to_json(t));
  write_file(dir / "transition.json", json{{"level", o.level}, {"transitions", transitions}}.dump(2) + "\n");

  std::size_t failures = 0;
  for (const CellSummary& s : result.summary) failures += s.failures;
  std::cout << json{{"cells", result.summary.size()},
                    {"trials", result.records.size()},
                    {"solver_failures", failures},
                    {"out_dir", dir.string()}}
                   .dump()
            << '\n';
  return 0;
}

// ---- theory ----------------------------------------------------------------

struct MgfOptions {
  std::string cycle_type;
  std::string permutation;
  std::size_t n = 0;
  std::vector<double> t{1.0};
  std::string beta = "1";
  std::string beta_star = "1";
  double c0 = BoundConstants{}.c0;
  double C0 = BoundConstants{}.C0;
};

constexpr const char* kMgfHeader = "n,cycle_type,t,value_log,bound_log,value";

void print_mgf_row(const CycleType& ct, const MgfParams& p, const BoundConstants& bc) {
  const MgfValue v = mgf_closed_form(ct, p);
  double bound_log = std::numeric_limits<double>::quiet_NaN();
  try {
    bound_log = mgf_upper_bound(ct, p, bc).log_bound_fc;
  } catch (const DomainError&) {
  }
  std::cout << ct.n() << ',' << csv_cell(ct.to_string()) << ',' << format_double(p.t) << ','
            << format_double(v.log_value) << ',' << format_double(bound_log) << ',' << format_double(v.value) << '\n';
}

int cmd_mgf(const MgfOptions& o) {
  if (o.cycle_type.empty() == o.permutation.empty())
    throw InvalidArgument("mgf: give exactly one of --cycle-type or --permutation");
  const CycleType ct = o.cycle_type.empty() ? cycle_type(parse_permutation(o.permutation)) : CycleType::parse(o.cycle_type);
  const BoundConstants bc{o.c0, o.C0};
  std::cout << kMgfHeader << '\n';
  for (double t : o.t)
    print_mgf_row(ct, {t, parse_vector(o.beta_star, "--beta-star"), parse_vector(o.beta, "--beta")}, bc);
  return 0;
}

int cmd_theory(const MgfOptions& o) {
  if (o.n < 1 || o.n > 60) throw InvalidArgument("theory: --n must be in [1, 60]");
  const BoundConstants bc{o.c0, o.C0};
  std::cout << kMgfHeader << '\n';
  for (double t : o.t)
    for (const CycleType& ct : all_cycle_types(o.n))
      print_mgf_row(ct, {t, parse_vector(o.beta_star, "--beta-star"), parse_vector(o.beta, "--beta")}, bc);
  return 0;
}

struct ThresholdOptions {
  std::vector<std::size_t> n{10};
  std::string mode = "both";
  double epsilon = 0.0;
};

int cmd_thresholds(const ThresholdOptions& o) {
  std::vector<RecoveryMode> modes;
  if (o.mode == "exact" || o.mode == "both") modes.push_back(RecoveryMode::exact);
  if (o.mode == "almost-exact" || o.mode == "almost_exact" || o.mode == "both") modes.push_back(RecoveryMode::almost_exact);
  if (modes.empty()) throw InvalidArgument("thresholds: --mode must be exact, almost-exact or both");
  std::cout << "n,mode,epsilon,snr_exponent,snr_threshold\n";
  for (std::size_t n : o.n)
    for (RecoveryMode m : modes) {
      const ThresholdQuery q{n, m, o.epsilon};
      std::cout << n << ',' << (m == RecoveryMode::exact ? "exact" : "almost_exact") << ','
                << format_double(o.epsilon) << ',' << format_double(threshold_exponent(q)) << ','
                << format_double(threshold_snr(q)) << '\n';
    }
  return 0;
}

// ---- oracle-check ----------------------------------------------------------

struct OracleOptions {
  std::size_t n_max = 7;
  std::size_t trials = 100;
  std::uint64_t seed = kDefaultSeed;
};

int cmd_oracle_check(const OracleOptions& o) {
  if (o.n_max < 3 || o.n_max > kBruteForceCap)
    throw InvalidArgument("oracle-check: --n-max must be in [3, " + std::to_string(kBruteForceCap) + "]");
  Rng rng(o.seed);
  struct Check {
    std::string name;
    std::size_t cases = 0, failures = 0;
    double worst = 0.0;
  };
  Check d1{"exact_d1_vs_brute_force"}, pyth{"projection_identity"}, net{"net_search_within_slack"};

  auto random_instance = [&](std::size_t n, std::size_t d) {
    ModelConfig c;
    c.n = n;
    c.d = d;
    c.snr = std::pow(10.0, rng.uniform() * 8.0 - 2.0);
    c.beta_direction = BetaDirection::random_sphere;
    return generate(c, rng.next_u64());
  };

  for (std::size_t i = 0; i < o.trials; ++i) {
    const std::size_t n = 3 + rng.below(o.n_max - 2);
    const Instance inst = random_instance(n, 1);
    const Estimate bf = solve_brute_force(inst.X, inst.y);
    const double gap = std::abs(solve_exact_d1(inst.X, inst.y).residual_sq - bf.residual_sq);
    ++d1.cases;
    d1.failures += gap > 1e-9;
    d1.worst = std::max(d1.worst, gap);

    const Permutation pi = sample_uniform(n, rng);
    const auto [res, obj] = residual_and_objective(inst.X, pi, inst.y);
    const double rel = std::abs(res + obj - inst.y.squaredNorm()) / inst.y.squaredNorm();
    ++pyth.cases;
    pyth.failures += rel > 1e-8;
    pyth.worst = std::max(pyth.worst, rel);
  }

  const std::size_t net_n_max = std::min<std::size_t>(o.n_max, 6);
  for (std::size_t i = 0; i < (o.trials + 1) / 2; ++i) {
    const std::size_t n = 3 + rng.below(net_n_max - 2);
    const Instance inst = random_instance(n, 2);
    const NetSpec spec = covering_net(inst.X, inst.y, 1e4);
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(inst.X).singularValues()(0);
    const double slack = smax * smax * spec.delta * spec.delta;
    const double excess = solve_net_search(inst.X, inst.y, spec).residual_sq - solve_brute_force(inst.X, inst.y).residual_sq;
    ++net.cases;
    net.failures += excess > slack + 1e-9;
    net.worst = std::max(net.worst, excess / slack);
  }

  json checks = json::array();
  bool passed = true;
  for (const Check* c : {&d1, &pyth, &net}) {
    checks.push_back({{"name", c->name}, {"cases", c->cases}, {"failures", c->failures}, {"worst", c->worst}});
    passed = passed && c->failures == 0;
  }
  std::cout << json{{"passed", passed}, {"seed", o.seed}, {"checks", checks}}.dump(2) << '\n';
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shuffled linear regression solvers, sweeps and theory calculators"};
  app.require_subcommand(1);

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Solve one instance (from a file or generated) and print the estimate as JSON");
  s->add_option("--instance", solve.instance_path, "Instance JSON file")->check(CLI::ExistingFile);
  s->add_option("--save-instance", solve.save_instance, "Write the generated instance here");
  s->add_option("--n", solve.n, "Sample count");
  s->add_option("--d", solve.d, "Dimension");
  auto* snr = s->add_option("--snr", solve.snr, "SNR = |beta*|^2 / sigma^2");
  auto* snr_exp = s->add_option("--snr-exp", solve.snr_exp, "SNR = n^c");
  auto* sigma = s->add_option("--sigma", solve.sigma, "Noise standard deviation (0 = noiseless)");
  snr->excludes(snr_exp)->excludes(sigma);
  snr_exp->excludes(sigma);
  s->add_option("--beta-norm", solve.beta_norm, "|beta*|");
  s->add_option("--beta-direction", solve.beta_direction, "first_axis | random_sphere");
  s->add_option("--seed", solve.seed, "Generation seed");
  s->add_option("--solver", solve.solver, "auto | exact-d1 | net-search | brute-force | alt-min");
  s->add_option("--net-budget", solve.net_budget, "Cap on the net cardinality bound");
  s->add_option("--net-radius", solve.net_radius, "Net radius (default 3|beta_warm|)");
  s->add_option("--net-delta", solve.net_delta, "Net resolution (default: finest within budget)");
  s->add_option("--net-center", solve.net_center, "Net center as comma-separated values");
  s->add_option("--max-iters", solve.max_iters, "alt-min iteration cap");
  s->add_option("--brute-cap", solve.brute_cap, "Largest n for brute force");
  s->add_option("--threads", solve.threads, "Worker threads (default SLR_THREADS or all cores)");

  SweepOptions sweep;
  auto* sw = app.add_subcommand("sweep", "Run a Monte Carlo grid; writes trials.csv, summary.csv, transition.json");
  sw->add_option("--config", sweep.config, "Grid config JSON")->required()->check(CLI::ExistingFile);
  sw->add_option("--out", sweep.out_dir, "Output directory");
  sw->add_option("--level", sweep.level, "Crossing level for the transition estimate");
  sw->add_option("--threads", sweep.threads, "Worker threads (default SLR_THREADS or all cores)");
  sw->add_flag("--progress", sweep.progress, "Report progress on stderr");

  MgfOptions mgf;
  auto* m = app.add_subcommand("mgf", "Closed-form MGF and its cycle-type bound as CSV");
  m->add_option("--cycle-type", mgf.cycle_type, "e.g. 1:2,3:1");
  m->add_option("--permutation", mgf.permutation, "1-based map, e.g. [2,1,3]");
  m->add_option("--t", mgf.t, "MGF parameter(s)")->expected(1, -1);
  m->add_option("--beta", mgf.beta, "beta, comma-separated");
  m->add_option("--beta-star", mgf.beta_star, "beta*, comma-separated");
  m->add_option("--c0", mgf.c0, "Bound constant c0");
  m->add_option("--C0", mgf.C0, "Bound validity threshold C0");

  MgfOptions theory;
  auto* th = app.add_subcommand("theory", "MGF and bound for every cycle type of n as CSV");
  th->add_option("--n", theory.n, "Ground-set size")->required();
  th->add_option("--t", theory.t, "MGF parameter(s)")->expected(1, -1);
  th->add_option("--beta", theory.beta, "beta, comma-separated");
  th->add_option("--beta-star", theory.beta_star, "beta*, comma-separated");
  th->add_option("--c0", theory.c0, "Bound constant c0");
  th->add_option("--C0", theory.C0, "Bound validity threshold C0");

  ThresholdOptions thr;
  auto* t = app.add_subcommand("thresholds", "Recovery SNR thresholds as CSV");
  t->add_option("--n", thr.n, "Sample count(s)")->expected(1, -1);
  t->add_option("--mode", thr.mode, "exact | almost-exact | both");
  t->add_option("--epsilon", thr.epsilon, "Slack exponent");

  OracleOptions oc;
  auto* o = app.add_subcommand("oracle-check", "Cross-check solvers against exhaustive search");
  o->add_option("--n-max", oc.n_max, "Largest n");
  o->add_option("--trials", oc.trials, "Random instances per check");
  o->add_option("--seed", oc.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what(), 2);
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*sw) return cmd_sweep(sweep);
    if (*m) return cmd_mgf(mgf);
    if (*th) return cmd_theory(theory);
    if (*t) return cmd_thresholds(thr);
    if (*o) return cmd_oracle_check(oc);
  } catch (const InvalidArgument& e) {
    return emit_error(e.kind(), e.what(), 2);
  } catch (const DimensionError& e) {
    return emit_error(e.kind(), e.what(), 2);
  } catch (const Error& e) {
    return emit_error(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return emit_error("internal", e.what(), 1);
  }
  return 2;
}
