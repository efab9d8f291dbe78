#pragma once

// Closed-form moment generating function of |X b* - P X b|^2 over a Gaussian
// design, its cycle-type bounds, and threshold/tail calculators.
//
// For a permutation with n_k cycles of length k,
//
//   E_X exp(-t |X b* - P X b|^2) = prod_k (p^k - q^k)^(-n_k),
//
//   A = sqrt(1 + 2t |b* + b|^2),  B = sqrt(1 + 2t |b* - b|^2),
//   p = (A + B) / 2,              q = (A - B) / 2.
//
// Everything is evaluated in log space. With r = q/p, |r| < 1 and
//   log(p^k - q^k) = k log p + log(1 - r^k),
// where 1 - |r| = min(A, B) / p and |q| = 4t |<b*, b>| / (A + B) are formed
// without cancellation.

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "slr/error.hpp"
#include "slr/net.hpp"
#include "slr/perm.hpp"

namespace slr {

struct MgfParams {
  double t = 1.0;
  Eigen::VectorXd beta_star;
  Eigen::VectorXd beta;

  void validate() const {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("mgf: t must be positive and finite");
    if (beta_star.size() == 0 || beta_star.size() != beta.size())
      throw DimensionError("mgf: beta and beta_star must have the same positive dimension");
  }
};

struct PQ {
  double A = 1.0;  ///< sqrt(1 + 2t|b* + b|^2) = p + q
  double B = 1.0;  ///< sqrt(1 + 2t|b* - b|^2) = p - q
  double p = 1.0;
  double q = 0.0;
  double abs_q = 0.0;
  double log1p_dist = 0.0;  ///< log(1 + 2t|b - b*|^2) = 2 log(p - q)
};

inline PQ compute_pq(const MgfParams& params) {
  params.validate();
  const double t = params.t;
  PQ r;
  const double plus2 = (params.beta_star + params.beta).squaredNorm();
  const double minus2 = (params.beta_star - params.beta).squaredNorm();
  r.log1p_dist = std::log1p(2.0 * t * minus2);
  r.A = std::sqrt(1.0 + 2.0 * t * plus2);
  r.B = std::sqrt(1.0 + 2.0 * t * minus2);
  r.p = 0.5 * (r.A + r.B);
  const double inner = params.beta_star.dot(params.beta);
  r.abs_q = 4.0 * t * std::abs(inner) / (r.A + r.B);
  r.q = inner < 0.0 ? -r.abs_q : r.abs_q;
  return r;
}

/// log(p^k - q^k) for k >= 1.
inline double log_pk_minus_qk(std::size_t k, const PQ& pq) {
  if (k == 0) throw InvalidArgument("log_pk_minus_qk: k must be positive");
  if (k == 1) return 0.5 * pq.log1p_dist;
  const double kd = static_cast<double>(k);
  const double k_log_p = kd * std::log(pq.p);
  if (pq.abs_q == 0.0) return k_log_p;
  // log|r|, with 1 - |r| = min(A, B) / p
  const double log_abs_r = std::log1p(-std::min(pq.A, pq.B) / pq.p);
  const double k_log_abs_r = kd * log_abs_r;
  const bool rk_negative = pq.q < 0.0 && (k % 2 == 1);
  const double log_one_minus_rk =
      rk_negative ? std::log1p(std::exp(k_log_abs_r)) : std::log(-std::expm1(k_log_abs_r));
  return k_log_p + log_one_minus_rk;
}

struct MgfValue {
  double log_value = 0.0;
  double value = 1.0;  ///< exp(log_value); 0 when it underflows
};

inline MgfValue mgf_closed_form(const CycleType& ct, const MgfParams& params) {
  if (ct.n() == 0) throw InvalidArgument("mgf: empty cycle type");
  const PQ pq = compute_pq(params);
  double log_value = 0.0;
  for (auto [k, nk] : ct.counts()) log_value -= static_cast<double>(nk) * log_pk_minus_qk(k, pq);
  return {log_value, std::exp(log_value)};
}

inline MgfValue mgf_closed_form(const Permutation& pi, const MgfParams& params) {
  return mgf_closed_form(cycle_type(pi), params);
}

/// Absolute constants of the cycle-type bounds. Defaults follow the proof of
/// the p^k - q^k lower bound: valid once sqrt(t)|b*| >= 5 sqrt(2), with the
/// base (s/3) = (sqrt(2)/3) sqrt(t)|b*| >= (1/3) sqrt(t)|b*|.
struct BoundConstants {
  double c0 = 1.0 / 3.0;
  double C0 = 5.0 * std::numbers::sqrt2;
};

struct MgfBounds {
  double log_bound_fc = 0.0;  ///< exponent n - #c on the cycle factor
  double log_bound_n1 = 0.0;  ///< exponent (n - n_1) / 2 on the cycle factor

  double bound_fc() const { return std::exp(log_bound_fc); }
  double bound_n1() const { return std::exp(log_bound_n1); }
};

/// (1 + 2t|b - b*|^2)^(-n_1/2) (c0 sqrt(t)|b*|)^(-(n - #c)) and the weaker
/// variant with exponent (n - n_1)/2. Requires sqrt(t)|b*| >= C0.
inline MgfBounds mgf_upper_bound(const CycleType& ct, const MgfParams& params,
                                 const BoundConstants& constants = {}) {
  const PQ pq = compute_pq(params);
  const double scale = std::sqrt(params.t) * params.beta_star.norm();
  if (!(scale >= constants.C0))
    throw DomainError("mgf bound: needs sqrt(t)*|beta_star| >= " + std::to_string(constants.C0) + ", got " +
                      std::to_string(scale));
  const double n = static_cast<double>(ct.n());
  const double n1 = static_cast<double>(ct.fixed_points());
  const double cycles = static_cast<double>(ct.total_cycles());
  const double log_base = std::log(constants.c0 * scale);
  const double fixed_part = -0.5 * n1 * pq.log1p_dist;
  return {fixed_part - (n - cycles) * log_base, fixed_part - 0.5 * (n - n1) * log_base};
}

struct PkQkWitness {
  bool holds = false;
  double log_lhs = 0.0;  ///< log(p^k - q^k)
  double log_rhs = 0.0;  ///< (k-1) log(s/3)
  double s = 0.0;        ///< sqrt(2t)|b*|

  double lhs() const { return std::exp(log_lhs); }
  double rhs() const { return std::exp(log_rhs); }
};

/// Evaluates p^k - q^k >= (s/3)^(k-1), s = sqrt(2t)|b*|, valid for s >= 10.
inline PkQkWitness pkqk_lower_bound_check(std::size_t k, const MgfParams& params) {
  if (k < 2) throw InvalidArgument("pkqk check: k must be at least 2");
  const PQ pq = compute_pq(params);
  PkQkWitness w;
  w.s = std::sqrt(2.0 * params.t) * params.beta_star.norm();
  if (!(w.s >= 10.0)) throw DomainError("pkqk check: needs s = sqrt(2t)*|beta_star| >= 10, got " + std::to_string(w.s));
  w.log_lhs = log_pk_minus_qk(k, pq);
  w.log_rhs = static_cast<double>(k - 1) * std::log(w.s / 3.0);
  w.holds = w.log_lhs >= w.log_rhs;
  return w;
}

struct ChiSquareDeviations {
  double upper = 0.0;  ///< m + 2 sqrt(m t) + 2t, exceeded with probability <= e^-t
  double lower = 0.0;  ///< m - 2 sqrt(m t), undershot with probability <= e^-t
};

inline ChiSquareDeviations chi_square_tail_bounds(double m, double t) {
  if (!(m >= 1.0)) throw InvalidArgument("chi-square bounds: m must be at least 1");
  if (!(t >= 0.0)) throw InvalidArgument("chi-square bounds: t must be non-negative");
  const double root = 2.0 * std::sqrt(m * t);
  return {m + root + 2.0 * t, m - root};
}

enum class RecoveryMode { exact, almost_exact };

struct ThresholdQuery {
  std::size_t n = 2;
  RecoveryMode mode = RecoveryMode::exact;
  double epsilon = 0.0;
};

/// SNR sufficient for recovery: n^(4+eps) for exact, n^(2+eps) for almost exact.
inline double threshold_exponent(const ThresholdQuery& q) {
  if (q.n < 2) throw InvalidArgument("threshold: n must be at least 2");
  if (!(q.epsilon >= 0.0)) throw InvalidArgument("threshold: epsilon must be non-negative");
  return (q.mode == RecoveryMode::exact ? 4.0 : 2.0) + q.epsilon;
}

inline double threshold_snr(const ThresholdQuery& q) {
  return std::pow(static_cast<double>(q.n), threshold_exponent(q));
}

/// All cycle types of n points (integer partitions), largest part first.
inline std::vector<CycleType> all_cycle_types(std::size_t n) {
  if (n == 0) throw InvalidArgument("all_cycle_types: n must be positive");
  std::vector<CycleType> out;
  std::vector<std::size_t> parts;
  auto rec = [&](auto&& self, std::size_t remaining, std::size_t max_part) -> void {
    if (remaining == 0) {
      std::map<std::size_t, std::size_t> counts;
      for (std::size_t k : parts) ++counts[k];
      out.emplace_back(n, std::move(counts));
      return;
    }
    for (std::size_t k = std::min(remaining, max_part); k >= 1; --k) {
      parts.push_back(k);
      self(self, remaining - k, k);
      parts.pop_back();
    }
  };
  rec(rec, n, n);
  return out;
}

}  // namespace slr
