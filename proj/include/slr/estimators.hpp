#pragma once

// Maximum-likelihood solvers for y = P X b + w over (P, b):
//   * least-squares refit for a fixed permutation,
//   * exact sort-based solver for d = 1,
//   * delta-net search over b with a sorting assignment per net node,
//   * exhaustive search (test oracle),
//   * alternating minimization baseline.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "slr/error.hpp"
#include "slr/net.hpp"
#include "slr/perm.hpp"

namespace slr {

enum class Solver { exact_d1, net_search, brute_force, alt_min };

inline std::string_view solver_name(Solver s) {
  switch (s) {
    case Solver::exact_d1: return "exact_d1";
    case Solver::net_search: return "net_search";
    case Solver::brute_force: return "brute_force";
    case Solver::alt_min: return "alt_min";
  }
  return "unknown";
}

/// Accepts both "exact_d1" and "exact-d1" spellings.
inline Solver parse_solver(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  for (Solver v : {Solver::exact_d1, Solver::net_search, Solver::brute_force, Solver::alt_min})
    if (s == solver_name(v)) return v;
  throw InvalidArgument("unknown solver: " + std::string(name));
}

struct SolverStats {
  std::size_t candidates = 0;  ///< permutations refit or net nodes scanned
  std::size_t iterations = 0;
  bool degenerate_ties = false;
  std::optional<NetSpec> net;
  std::vector<double> residual_trace;
};

struct Estimate {
  Permutation pi_hat;
  Eigen::VectorXd beta_hat;
  double residual_sq = 0.0;
  double qap_objective = 0.0;
  Solver solver = Solver::exact_d1;
  SolverStats stats;
};

struct Fit {
  Eigen::VectorXd beta;
  double residual_sq = 0.0;
  double qap_objective = 0.0;
};

/// Column-pivoted QR of a fixed design, reused across permutations.
/// min_b |y - P X b|^2 = min_b |P^T y - X b|^2, so only y is permuted.
class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::MatrixXd& X) : X_(X) {
    if (X.rows() == 0 || X.cols() == 0) throw DimensionError("least squares: empty design");
    if (X.rows() < X.cols()) throw DimensionError("least squares: n < d");
    qr_.compute(X);
    if (qr_.rank() < X.cols()) throw SingularDesign("least squares: design is rank deficient");
  }

  const Eigen::MatrixXd& design() const { return X_; }

  Fit fit(const Permutation& pi, const Eigen::VectorXd& y) const {
    check(pi, y);
    const Eigen::VectorXd z = apply_transpose(pi, y);
    Fit f;
    f.beta = qr_.solve(z);
    const Eigen::VectorXd fitted = X_ * f.beta;
    f.residual_sq = (z - fitted).squaredNorm();
    f.qap_objective = fitted.squaredNorm();
    return f;
  }

 private:
  void check(const Permutation& pi, const Eigen::VectorXd& y) const {
    if (pi.size() != static_cast<std::size_t>(X_.rows()) || y.size() != X_.rows())
      throw DimensionError("least squares: size mismatch between X, pi and y");
  }

  Eigen::MatrixXd X_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

/// b_P = argmin_b |y - P X b|^2.
inline Eigen::VectorXd least_squares_beta(const Eigen::MatrixXd& X, const Permutation& pi,
                                          const Eigen::VectorXd& y) {
  return LeastSquares(X).fit(pi, y).beta;
}

/// (|P_{(PX)^perp} y|^2, |P_{PX} y|^2).
inline std::pair<double, double> residual_and_objective(const Eigen::MatrixXd& X, const Permutation& pi,
                                                        const Eigen::VectorXd& y) {
  const Fit f = LeastSquares(X).fit(pi, y);
  return {f.residual_sq, f.qap_objective};
}

/// Indices ordering v ascending, equal keys by index.
inline std::vector<std::size_t> stable_argsort(const Eigen::VectorXd& v, bool* ties = nullptr) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return v(static_cast<Eigen::Index>(a)) < v(static_cast<Eigen::Index>(b));
  });
  if (ties)
    for (std::size_t j = 1; j < idx.size(); ++j)
      if (v(static_cast<Eigen::Index>(idx[j])) == v(static_cast<Eigen::Index>(idx[j - 1]))) *ties = true;
  return idx;
}

struct Assignment {
  Permutation pi;
  bool ties = false;
};

/// argmax_P <y, P z>: the j-th smallest y is matched to the j-th smallest z.
inline Assignment sort_assignment(const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  if (y.size() != z.size()) throw DimensionError("sort assignment: size mismatch");
  Assignment a;
  const auto oy = stable_argsort(y, &a.ties);
  const auto oz = stable_argsort(z, &a.ties);
  std::vector<std::size_t> map(oy.size());
  for (std::size_t j = 0; j < oy.size(); ++j) map[oy[j]] = oz[j];
  a.pi = Permutation::from_map(std::move(map));
  return a;
}

namespace detail {

inline Estimate make_estimate(Solver solver, Permutation pi, const Fit& f, SolverStats stats) {
  Estimate e;
  e.pi_hat = std::move(pi);
  e.beta_hat = f.beta;
  e.residual_sq = f.residual_sq;
  e.qap_objective = f.qap_objective;
  e.solver = solver;
  e.stats = std::move(stats);
  return e;
}

inline void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw DimensionError("solver: X and y have different row counts");
  if (X.cols() == 0) throw DimensionError("solver: d must be positive");
}

}  // namespace detail

/// Global minimizer for d = 1. For b > 0 the best P sorts y against x, for
/// b < 0 against -x; both candidates are refit and the smaller residual wins
/// (the positive branch on exact ties).
inline Estimate solve_exact_d1(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  detail::check_shapes(X, y);
  if (X.cols() != 1) throw InvalidArgument("exact_d1 requires d = 1");
  const LeastSquares ls(X);
  const Eigen::VectorXd x = X.col(0);

  Assignment plus = sort_assignment(y, x);
  Assignment minus = sort_assignment(y, Eigen::VectorXd(-x));
  const Fit fp = ls.fit(plus.pi, y);
  const Fit fm = ls.fit(minus.pi, y);

  SolverStats stats;
  stats.candidates = 2;
  stats.iterations = 1;
  stats.degenerate_ties = plus.ties || minus.ties;
  if (fm.residual_sq < fp.residual_sq) return detail::make_estimate(Solver::exact_d1, std::move(minus.pi), fm, stats);
  return detail::make_estimate(Solver::exact_d1, std::move(plus.pi), fp, stats);
}

/// Sorted match of y against the first design column, refit.
inline Fit warm_start(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  detail::check_shapes(X, y);
  const LeastSquares ls(X);
  return ls.fit(sort_assignment(y, X.col(0)).pi, y);
}

/// Net centered at the warm start with r = 3|b_warm| (1 if that is zero) and
/// the finest delta the budget allows.
inline NetSpec default_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double budget = 1e6) {
  NetSpec net;
  net.center = warm_start(X, y).beta;
  net.radius = 3.0 * net.center.norm();
  if (!(net.radius > 0.0)) net.radius = 1.0;
  net.budget = budget;
  net.delta = delta_for_budget(net.radius, static_cast<std::size_t>(X.cols()), budget);
  return net;
}

/// Net centered at the origin with radius |y| / s_min(X). Every refit b_P has
/// |b_P| <= |y| / s_min(PX) = |y| / s_min(X), so this ball holds all of them.
inline NetSpec covering_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double budget = 1e6) {
  detail::check_shapes(X, y);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  const double smin = svd.singularValues().tail(1)(0);
  if (!(smin > 0.0)) throw SingularDesign("covering net: design is rank deficient");
  NetSpec net;
  net.center = Eigen::VectorXd::Zero(X.cols());
  net.radius = y.norm() / smin * (1.0 + 1e-9);
  if (!(net.radius > 0.0)) net.radius = 1.0;
  net.budget = budget;
  net.delta = delta_for_budget(net.radius, static_cast<std::size_t>(X.cols()), budget);
  return net;
}

namespace detail {

struct NetCandidate {
  double residual = std::numeric_limits<double>::infinity();
  std::optional<Permutation> pi;
  bool ties = false;

  /// Total order by (residual, lexicographic permutation).
  bool better_than(const NetCandidate& other) const {
    if (!pi) return false;
    if (!other.pi) return true;
    if (residual != other.residual) return residual < other.residual;
    return *pi < *other.pi;
  }
};

inline NetCandidate scan_net_block(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const std::vector<std::size_t>& y_order, const Eigen::MatrixXd& nodes,
                                   Eigen::Index first, Eigen::Index last) {
  NetCandidate best;
  bool any_ties = false;
  const auto n = static_cast<std::size_t>(y.size());
  Eigen::VectorXd y_sorted(y.size());
  for (std::size_t j = 0; j < n; ++j) y_sorted(static_cast<Eigen::Index>(j)) = y(static_cast<Eigen::Index>(y_order[j]));

  for (Eigen::Index c = first; c < last; ++c) {
    const Eigen::VectorXd z = X * nodes.col(c);
    bool ties = false;
    const auto oz = stable_argsort(z, &ties);
    double res = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = y_sorted(static_cast<Eigen::Index>(j)) - z(static_cast<Eigen::Index>(oz[j]));
      res += r * r;
    }
    any_ties = any_ties || ties;
    if (best.pi && res > best.residual) continue;
    std::vector<std::size_t> map(n);
    for (std::size_t j = 0; j < n; ++j) map[y_order[j]] = oz[j];
    NetCandidate cand;
    cand.residual = res;
    cand.pi = Permutation::from_map(std::move(map));
    if (cand.better_than(best)) best = std::move(cand);
  }
  best.ties = any_ties;
  return best;
}

}  // namespace detail

/// For every node b of the grid net, the assignment minimizing |y - P X b|^2
/// is found by sorting; the node with the smallest such residual wins (ties
/// by lexicographic permutation) and b is refit on its permutation.
/// Nodes are split into contiguous blocks across `threads` workers and the
/// block winners reduced in block order, so the result does not depend on
/// the worker count.
inline Estimate solve_net_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const NetSpec& net,
                                 unsigned threads = 1) {
  detail::check_shapes(X, y);
  if (net.dim() != static_cast<std::size_t>(X.cols())) throw DimensionError("net search: net dimension != d");
  const LeastSquares ls(X);
  const Eigen::MatrixXd nodes = build_grid_net(net);

  bool y_ties = false;
  const auto y_order = stable_argsort(y, &y_ties);

  const Eigen::Index count = nodes.cols();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<Eigen::Index>(1, count / 256))));
  std::vector<detail::NetCandidate> winners(threads);
  if (threads == 1) {
    winners[0] = detail::scan_net_block(X, y, y_order, nodes, 0, count);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      const Eigen::Index first = count * t / threads;
      const Eigen::Index last = count * (t + 1) / threads;
      pool.emplace_back([&, t, first, last] { winners[t] = detail::scan_net_block(X, y, y_order, nodes, first, last); });
    }
    for (auto& th : pool) th.join();
  }

  detail::NetCandidate best;
  bool ties = y_ties;
  for (auto& w : winners) {
    ties = ties || w.ties;
    if (w.better_than(best)) best = std::move(w);
  }
  if (!best.pi) throw InvalidArgument("net search: empty net");

  SolverStats stats;
  stats.candidates = static_cast<std::size_t>(count);
  stats.iterations = 1;
  stats.degenerate_ties = ties;
  stats.net = net;
  const Fit f = ls.fit(*best.pi, y);
  return detail::make_estimate(Solver::net_search, std::move(*best.pi), f, std::move(stats));
}

inline constexpr std::size_t kBruteForceCap = 8;

/// Exhaustive minimum over all n! permutations in lexicographic order;
/// exact residual ties keep the lexicographically smaller permutation.
inline Estimate solve_brute_force(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  std::size_t cap = kBruteForceCap) {
  detail::check_shapes(X, y);
  const auto n = static_cast<std::size_t>(X.rows());
  if (n > cap) {
    const double work = static_cast<double>(factorial(n).convert_to<double>());
    throw BudgetExceeded("brute force: n = " + std::to_string(n) + " exceeds cap " + std::to_string(cap), work);
  }
  const LeastSquares ls(X);
  std::vector<std::size_t> map(n);
  std::iota(map.begin(), map.end(), 0);

  std::optional<Permutation> best_pi;
  Fit best;
  SolverStats stats;
  do {
    Permutation pi = Permutation::from_map(map);
    Fit f = ls.fit(pi, y);
    ++stats.candidates;
    if (!best_pi || f.residual_sq < best.residual_sq) {
      best = std::move(f);
      best_pi = std::move(pi);
    }
  } while (std::next_permutation(map.begin(), map.end()));
  stats.iterations = 1;
  return detail::make_estimate(Solver::brute_force, std::move(*best_pi), best, std::move(stats));
}

/// Alternates a refit of b with a sorting update of P, accepting a step only
/// if it strictly lowers the residual.
inline Estimate solve_alt_min(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Permutation& init,
                              std::size_t max_iters) {
  detail::check_shapes(X, y);
  if (max_iters < 1) throw InvalidArgument("alt_min: max_iters must be at least 1");
  if (init.size() != static_cast<std::size_t>(y.size())) throw DimensionError("alt_min: init has wrong size");
  const LeastSquares ls(X);

  Permutation pi = init;
  Fit fit = ls.fit(pi, y);
  SolverStats stats;
  stats.residual_trace.push_back(fit.residual_sq);
  while (stats.iterations < max_iters) {
    ++stats.iterations;
    Assignment next = sort_assignment(y, X * fit.beta);
    stats.degenerate_ties = stats.degenerate_ties || next.ties;
    ++stats.candidates;
    Fit cand = ls.fit(next.pi, y);
    if (!(cand.residual_sq < fit.residual_sq)) break;
    pi = std::move(next.pi);
    fit = std::move(cand);
    stats.residual_trace.push_back(fit.residual_sq);
  }
  return detail::make_estimate(Solver::alt_min, std::move(pi), fit, std::move(stats));
}

}  // namespace slr
