#pragma once

// Axis-aligned grid delta-nets of Euclidean balls.
//
// Grid spacing is h = 2*delta/sqrt(d), so every point of R^d is within
// h*sqrt(d)/2 = delta of its nearest grid node. A node is kept when its
// Voronoi cell (the cube of half-width h/2 around it) meets the ball, which
// keeps every ball point's nearest node in the net.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "slr/error.hpp"

namespace slr {

/// log of the volume bound (1 + 2r/delta)^d on the size of a delta-net of a
/// radius-r ball.
inline double log_net_cardinality_bound(double radius, double delta, std::size_t d) {
  if (!(radius > 0.0) || !(delta > 0.0)) throw InvalidArgument("net bound: radius and delta must be positive");
  if (d == 0) throw InvalidArgument("net bound: d must be positive");
  return static_cast<double>(d) * std::log1p(2.0 * radius / delta);
}

inline double net_cardinality_bound(double radius, double delta, std::size_t d) {
  return std::exp(log_net_cardinality_bound(radius, delta, d));
}

struct NetSpec {
  Eigen::VectorXd center;
  double radius = 1.0;
  double delta = 0.1;
  /// Refuse nets whose cardinality bound exceeds this.
  double budget = 1e6;

  std::size_t dim() const { return static_cast<std::size_t>(center.size()); }

  double cardinality_bound() const { return net_cardinality_bound(radius, delta, dim()); }

  void validate() const {
    if (center.size() == 0) throw InvalidArgument("net: empty center");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("net: radius must be positive");
    if (!(delta > 0.0)) throw InvalidArgument("net: delta must be positive");
    if (delta > 2.0 * radius) throw InvalidArgument("net: delta must not exceed 2r");
    const double logb = log_net_cardinality_bound(radius, delta, dim());
    if (logb > std::log(budget) + 1e-12)
      throw BudgetExceeded("net: cardinality bound (1+2r/delta)^d = " + std::to_string(std::exp(logb)) +
                               " exceeds budget " + std::to_string(budget),
                           std::exp(logb));
  }
};

/// Resolution that makes the cardinality bound equal the budget.
inline double delta_for_budget(double radius, std::size_t d, double budget) {
  if (!(budget >= 2.0)) throw InvalidArgument("net: budget must be at least 2");
  const double per_axis = std::exp(std::log(budget) / static_cast<double>(d));
  const double delta = 2.0 * radius / (per_axis - 1.0);
  return std::min(delta * (1.0 + 1e-9), 2.0 * radius);
}

inline double grid_spacing(double delta, std::size_t d) {
  return 2.0 * delta / std::sqrt(static_cast<double>(d));
}

/// Grid net nodes as columns of a d x N matrix, in odometer order
/// (first coordinate fastest).
inline Eigen::MatrixXd build_grid_net(const NetSpec& spec) {
  spec.validate();
  const std::size_t d = spec.dim();
  const double h = grid_spacing(spec.delta, d);
  const auto reach = static_cast<long>(std::ceil(spec.radius / h + 0.5));
  const double r2 = spec.radius * spec.radius * (1.0 + 1e-12);

  std::vector<long> k(d, -reach);
  std::vector<double> nodes;
  for (;;) {
    // squared distance from the center to the cell of node k
    double dist2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double gap = std::max(0.0, (std::abs(static_cast<double>(k[j])) - 0.5) * h);
      dist2 += gap * gap;
    }
    if (dist2 <= r2)
      for (std::size_t j = 0; j < d; ++j)
        nodes.push_back(spec.center(static_cast<Eigen::Index>(j)) + h * static_cast<double>(k[j]));

    std::size_t j = 0;
    while (j < d && k[j] == reach) k[j++] = -reach;
    if (j == d) break;
    ++k[j];
  }
  const auto count = static_cast<Eigen::Index>(nodes.size() / d);
  return Eigen::Map<Eigen::MatrixXd>(nodes.data(), static_cast<Eigen::Index>(d), count);
}

}  // namespace slr
