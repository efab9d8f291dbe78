#pragma once

// Seeded Monte Carlo sweeps over (n, d, SNR exponent) cells.
//
// Trial seeds are mix_seed({master_seed, n, d, bits(exponent), trial}), so any
// cell or trial can be regenerated on its own. Trials run on a worker pool
// but are stored by index, which makes the records independent of the
// worker count and the execution order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "slr/error.hpp"
#include "slr/estimators.hpp"
#include "slr/model.hpp"
#include "slr/perm.hpp"
#include "slr/rng.hpp"

namespace slr {

struct SolverConfig {
  /// Unset: exact_d1 for d = 1, net_search for d >= 2.
  std::optional<Solver> solver;
  double net_budget = 1e6;
  std::size_t alt_min_iters = 100;
  std::size_t brute_force_cap = kBruteForceCap;

  Solver resolve(std::size_t d) const {
    if (solver) return *solver;
    return d == 1 ? Solver::exact_d1 : Solver::net_search;
  }
};

inline Estimate run_solver(const SolverConfig& config, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           unsigned threads = 1) {
  switch (config.resolve(static_cast<std::size_t>(X.cols()))) {
    case Solver::exact_d1:
      return solve_exact_d1(X, y);
    case Solver::net_search:
      return solve_net_search(X, y, default_net(X, y, config.net_budget), threads);
    case Solver::brute_force:
      return solve_brute_force(X, y, config.brute_force_cap);
    case Solver::alt_min: {
      const Permutation init = sort_assignment(y, X.col(0)).pi;
      return solve_alt_min(X, y, init, config.alt_min_iters);
    }
  }
  throw InvalidArgument("unknown solver");
}

struct Cell {
  std::size_t n = 0;
  std::size_t d = 1;
  double snr_exponent = 0.0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct ExperimentGrid {
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> d_values{1};
  std::vector<double> snr_exponents;
  std::size_t trials_per_cell = 1;
  SolverConfig solver;
  std::uint64_t master_seed = 20240101;
  /// Refuse sweeps whose estimated operation count exceeds this.
  double max_work = 1e12;
  /// Off keeps wall_time_ms at 0 so trial files are reproducible byte for byte.
  bool record_timing = false;

  void validate() const {
    if (n_values.empty() || d_values.empty() || snr_exponents.empty())
      throw InvalidArgument("grid: n_values, d_values and snr_exponents must be non-empty");
    if (trials_per_cell < 1) throw InvalidArgument("grid: trials_per_cell must be at least 1");
    const std::size_t n_min = *std::min_element(n_values.begin(), n_values.end());
    for (std::size_t d : d_values) {
      if (d == 0) throw InvalidArgument("grid: d must be positive");
      if (d > n_min) throw DimensionError("grid: every d must be <= min(n_values)");
    }
    if (!std::is_sorted(snr_exponents.begin(), snr_exponents.end()))
      throw InvalidArgument("grid: snr_exponents must be sorted ascending");
    for (double c : snr_exponents)
      if (std::isnan(c)) throw InvalidArgument("grid: snr exponent is NaN");
  }

  /// Cells with n outermost and the exponent innermost.
  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (std::size_t n : n_values)
      for (std::size_t d : d_values)
        for (double c : snr_exponents) out.push_back({n, d, c});
    return out;
  }
};

inline std::uint64_t trial_seed(std::uint64_t master_seed, const Cell& cell, std::size_t trial_index) {
  return mix_seed({master_seed, static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.d),
                   double_bits(cell.snr_exponent), static_cast<std::uint64_t>(trial_index)});
}

/// Rough operation count of one trial, used only for budget refusals.
inline double estimate_trial_work(const Cell& cell, const SolverConfig& solver) {
  const double n = static_cast<double>(cell.n);
  const double d = static_cast<double>(cell.d);
  const double sort_cost = n * std::max(1.0, std::log2(n));
  double solve = 0.0;
  switch (solver.resolve(cell.d)) {
    case Solver::exact_d1:
      solve = 4.0 * sort_cost + 4.0 * n;
      break;
    case Solver::net_search:
      solve = solver.net_budget * (n * d + sort_cost);
      break;
    case Solver::brute_force:
      solve = std::tgamma(n + 1.0) * n * d;
      break;
    case Solver::alt_min:
      solve = static_cast<double>(solver.alt_min_iters) * (sort_cost + n * d * d);
      break;
  }
  return n * d + solve;
}

inline double estimate_grid_work(const ExperimentGrid& grid) {
  double total = 0.0;
  for (const Cell& c : grid.cells())
    total += static_cast<double>(grid.trials_per_cell) * estimate_trial_work(c, grid.solver);
  return total;
}

struct TrialRecord {
  Cell cell;
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  bool exact = false;
  double overlap = 0.0;
  double residual_sq = 0.0;
  double wall_time_ms = 0.0;
  /// Set when the solver refused (e.g. net budget); the trial then counts as
  /// a failed recovery with overlap 0 and residual NaN.
  bool failed = false;
  std::string failure;
};

inline ModelConfig cell_model(const Cell& cell) {
  ModelConfig m;
  m.n = cell.n;
  m.d = cell.d;
  m.snr_exponent = cell.snr_exponent;
  return m;
}

inline TrialRecord run_trial(const Cell& cell, std::size_t trial_index, std::uint64_t master_seed,
                             const SolverConfig& solver = {}, bool record_timing = false) {
  TrialRecord rec;
  rec.cell = cell;
  rec.trial_index = trial_index;
  rec.seed = trial_seed(master_seed, cell, trial_index);
  const Instance inst = generate(cell_model(cell), rec.seed);

  const auto start = std::chrono::steady_clock::now();
  try {
    const Estimate est = run_solver(solver, inst.X, inst.y);
    rec.exact = est.pi_hat == inst.pi_star;
    rec.overlap = overlap(est.pi_hat, inst.pi_star);
    rec.residual_sq = est.residual_sq;
  } catch (const BudgetExceeded& e) {
    rec.failed = true;
    rec.failure = e.what();
    rec.residual_sq = std::numeric_limits<double>::quiet_NaN();
  }
  if (record_timing)
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

struct CellSummary {
  Cell cell;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double recovery_rate = 0.0;
  double recovery_se = 0.0;
  double mean_overlap = 0.0;
  double overlap_se = 0.0;

  friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

using GridSummary = std::vector<CellSummary>;

/// Aggregates records cell by cell, in order of first appearance.
/// recovery_se = sqrt(p(1-p)/trials); overlap_se uses the sample standard
/// deviation (0 for a single trial).
inline GridSummary summarize(const std::vector<TrialRecord>& records) {
  GridSummary out;
  std::vector<std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const CellSummary& s) { return s.cell == r.cell; });
    if (it == out.end()) {
      out.push_back({r.cell});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&r);
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto& g = groups[c];
    const double m = static_cast<double>(g.size());
    double hits = 0.0, sum = 0.0;
    for (const TrialRecord* r : g) {
      hits += r->exact ? 1.0 : 0.0;
      sum += r->overlap;
      out[c].failures += r->failed ? 1 : 0;
    }
    const double p = hits / m;
    const double mean = sum / m;
    double ss = 0.0;
    for (const TrialRecord* r : g) ss += (r->overlap - mean) * (r->overlap - mean);
    out[c].trials = g.size();
    out[c].recovery_rate = p;
    out[c].recovery_se = std::sqrt(p * (1.0 - p) / m);
    out[c].mean_overlap = mean;
    out[c].overlap_se = g.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  }
  return out;
}

struct GridResult {
  std::vector<TrialRecord> records;
  GridSummary summary;
};

/// SLR_THREADS if set and positive, else the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("SLR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct RunOptions {
  unsigned threads = 0;  ///< 0: default_thread_count()
  /// Test hook: when set, tasks are dispatched in an order shuffled by this seed.
  std::optional<std::uint64_t> shuffle_order;
  /// Called after each finished trial with (done, total); serialized.
  std::function<void(std::size_t, std::size_t)> progress;
};

inline GridResult run_grid(const ExperimentGrid& grid, const RunOptions& options = {}) {
  grid.validate();
  const double work = estimate_grid_work(grid);
  if (work > grid.max_work)
    throw BudgetExceeded("sweep: estimated work " + std::to_string(work) + " exceeds max_work " +
                             std::to_string(grid.max_work),
                         work);

  const std::vector<Cell> cells = grid.cells();
  const std::size_t total = cells.size() * grid.trials_per_cell;
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  if (options.shuffle_order) {
    Rng rng(*options.shuffle_order);
    for (std::size_t i = total - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  }

  GridResult result;
  result.records.resize(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t slot; (slot = next.fetch_add(1)) < total;) {
      const std::size_t task = order[slot];
      const Cell& cell = cells[task / grid.trials_per_cell];
      result.records[task] =
          run_trial(cell, task % grid.trials_per_cell, grid.master_seed, grid.solver, grid.record_timing);
      const std::size_t finished = ++done;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(finished, total);
      }
    }
  };

  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads ? options.threads : default_thread_count(),
                                      static_cast<unsigned>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.summary = summarize(result.records);
  return result;
}

enum class Metric { recovery, overlap };

inline double metric_value(const CellSummary& s, Metric m) {
  return m == Metric::recovery ? s.recovery_rate : s.mean_overlap;
}
inline double metric_se(const CellSummary& s, Metric m) {
  return m == Metric::recovery ? s.recovery_se : s.overlap_se;
}

struct Transition {
  std::size_t n = 0;
  std::size_t d = 0;
  Metric metric = Metric::recovery;
  double level = 0.5;
  bool found = false;
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();  ///< bracketing exponents
  double upper = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Summary rows grouped per (n, d), each group sorted by exponent.
inline std::vector<std::vector<const CellSummary*>> group_by_nd(const GridSummary& summary) {
  std::vector<std::vector<const CellSummary*>> groups;
  for (const CellSummary& s : summary) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return g.front()->cell.n == s.cell.n && g.front()->cell.d == s.cell.d;
    });
    if (it == groups.end())
      groups.push_back({&s});
    else
      it->push_back(&s);
  }
  for (auto& g : groups)
    std::stable_sort(g.begin(), g.end(),
                     [](const CellSummary* a, const CellSummary* b) { return a->cell.snr_exponent < b->cell.snr_exponent; });
  return groups;
}

}  // namespace detail

/// First upward crossing of `level` per (n, d), by linear interpolation
/// between the bracketing exponents. found = false when no adjacent pair
/// straddles the level.
inline std::vector<Transition> estimate_transition(const GridSummary& summary, double level = 0.5,
                                                   Metric metric = Metric::recovery) {
  std::vector<Transition> out;
  for (const auto& g : detail::group_by_nd(summary)) {
    Transition tr;
    tr.n = g.front()->cell.n;
    tr.d = g.front()->cell.d;
    tr.metric = metric;
    tr.level = level;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      const double r0 = metric_value(*g[i], metric);
      const double r1 = metric_value(*g[i + 1], metric);
      if (r0 < level && r1 >= level) {
        const double e0 = g[i]->cell.snr_exponent;
        const double e1 = g[i + 1]->cell.snr_exponent;
        tr.found = true;
        tr.lower = e0;
        tr.upper = e1;
        tr.exponent = e0 + (level - r0) / (r1 - r0) * (e1 - e0);
        break;
      }
    }
    out.push_back(tr);
  }
  return out;
}

struct MonotonicityViolation {
  Cell lower;
  Cell upper;
  double drop = 0.0;
  double allowed = 0.0;
};

/// Adjacent exponent pairs where the metric falls by more than
/// `slack` combined standard errors, sqrt(se_i^2 + se_j^2).
inline std::vector<MonotonicityViolation> monotonicity_violations(const GridSummary& summary, Metric metric,
                                                                  double slack = 2.0) {
  std::vector<MonotonicityViolation> out;
  for (const auto& g : detail::group_by_nd(summary))
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      const double drop = metric_value(*g[i], metric) - metric_value(*g[i + 1], metric);
      const double se0 = metric_se(*g[i], metric), se1 = metric_se(*g[i + 1], metric);
      const double allowed = slack * std::sqrt(se0 * se0 + se1 * se1);
      if (drop > allowed) out.push_back({g[i]->cell, g[i + 1]->cell, drop, allowed});
    }
  return out;
}

}  // namespace slr
