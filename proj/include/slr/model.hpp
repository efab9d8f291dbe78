#pragma once

// Random-design shuffled regression instances y = P* X b* + w.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "slr/error.hpp"
#include "slr/perm.hpp"
#include "slr/rng.hpp"

namespace slr {

enum class BetaDirection { first_axis, random_sphere };
enum class PiLaw { uniform, identity, fixed };

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct ModelConfig {
  std::size_t n = 0;
  std::size_t d = 1;
  /// Signal-to-noise ratio |b*|^2 / sigma^2. +inf means sigma = 0.
  double snr = 1.0;
  /// When set, overrides snr with n^snr_exponent.
  std::optional<double> snr_exponent;
  double beta_norm = 1.0;
  BetaDirection beta_direction = BetaDirection::first_axis;
  PiLaw pi_law = PiLaw::uniform;
  std::optional<Permutation> fixed_pi;

  double effective_snr() const {
    return snr_exponent ? std::pow(static_cast<double>(n), *snr_exponent) : snr;
  }

  double sigma() const { return beta_norm / std::sqrt(effective_snr()); }

  void validate() const {
    if (n == 0 || d == 0) throw InvalidArgument("model: n and d must be positive");
    if (d > n) throw DimensionError("model: d > n leaves the design rank deficient");
    const double s = effective_snr();
    if (!(s > 0.0)) throw InvalidArgument("model: snr must be positive");
    if (!(beta_norm >= 0.0) || !std::isfinite(beta_norm))
      throw InvalidArgument("model: beta_norm must be finite and non-negative");
    if (pi_law == PiLaw::fixed) {
      if (!fixed_pi) throw InvalidArgument("model: pi_law=fixed needs fixed_pi");
      if (fixed_pi->size() != n) throw DimensionError("model: fixed_pi has wrong size");
    }
  }
};

struct Instance {
  std::size_t n = 0;
  std::size_t d = 0;
  Eigen::MatrixXd X;
  Eigen::VectorXd beta_star;
  Permutation pi_star;
  double sigma = 0.0;
  Eigen::VectorXd w;
  Eigen::VectorXd y;
  std::uint64_t seed = 0;

  /// P* X b* + w recomputed from the stored parts.
  Eigen::VectorXd reconstruct_y() const { return apply(pi_star, X * beta_star) + w; }
};

/// Draw order from Rng(seed): b* direction (random_sphere only, d normals),
/// X row-major (n*d normals), P* (Fisher-Yates, uniform law only), then n
/// standard normals scaled by sigma for w.
inline Instance generate(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Instance inst;
  inst.n = config.n;
  inst.d = config.d;
  inst.seed = seed;
  inst.sigma = config.sigma();

  const auto n = static_cast<Eigen::Index>(config.n);
  const auto d = static_cast<Eigen::Index>(config.d);

  inst.beta_star = Eigen::VectorXd::Zero(d);
  if (config.beta_direction == BetaDirection::random_sphere) {
    for (Eigen::Index j = 0; j < d; ++j) inst.beta_star(j) = rng.normal();
    const double norm = inst.beta_star.norm();
    inst.beta_star *= norm > 0 ? config.beta_norm / norm : 0.0;
  } else {
    inst.beta_star(0) = config.beta_norm;
  }

  inst.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) inst.X(i, j) = rng.normal();

  switch (config.pi_law) {
    case PiLaw::uniform:
      inst.pi_star = sample_uniform(config.n, rng);
      break;
    case PiLaw::identity:
      inst.pi_star = Permutation(config.n);
      break;
    case PiLaw::fixed:
      inst.pi_star = *config.fixed_pi;
      break;
  }

  inst.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.w(i) = inst.sigma * rng.normal();
  if (inst.sigma == 0.0) inst.w.setZero();

  inst.y = inst.reconstruct_y();
  return inst;
}

/// |b*|^2 / sigma^2; +inf for the noiseless model.
inline double snr_of(const Instance& inst) {
  if (inst.sigma == 0.0) return kNoiseless;
  return inst.beta_star.squaredNorm() / (inst.sigma * inst.sigma);
}

}  // namespace slr
