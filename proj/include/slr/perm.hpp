#pragma once

// Permutations of {0..n-1} stored as forward maps, with cycle structure,
// overlap and exact counting helpers.
//
// Convention: the permutation matrix P of a map p has P(i, p(i)) = 1, so
// (P v)_i = v_{p(i)}. Row i of P*X is row p(i) of X. Text forms are 1-based.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "slr/error.hpp"
#include "slr/rng.hpp"

namespace slr {

using BigInt = boost::multiprecision::cpp_int;

class Permutation {
 public:
  Permutation() = default;

  /// Identity on n points.
  explicit Permutation(std::size_t n) : map_(n) { std::iota(map_.begin(), map_.end(), 0); }

  /// From a 0-based forward map; throws InvalidArgument unless it is a bijection.
  static Permutation from_map(std::vector<std::size_t> map) {
    std::vector<char> seen(map.size(), 0);
    for (std::size_t v : map) {
      if (v >= map.size() || seen[v])
        throw InvalidArgument("permutation map is not a bijection");
      seen[v] = 1;
    }
    Permutation p;
    p.map_ = std::move(map);
    return p;
  }

  /// From 1-based values, the serialized form.
  static Permutation from_one_based(std::span<const long long> values) {
    std::vector<std::size_t> map(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < 1) throw InvalidArgument("permutation entries are 1-based");
      map[i] = static_cast<std::size_t>(values[i] - 1);
    }
    return from_map(std::move(map));
  }

  std::size_t size() const noexcept { return map_.size(); }
  std::size_t operator()(std::size_t i) const { return map_[i]; }
  const std::vector<std::size_t>& map() const noexcept { return map_; }

  bool is_identity() const noexcept {
    for (std::size_t i = 0; i < map_.size(); ++i)
      if (map_[i] != i) return false;
    return true;
  }

  Permutation inverse() const {
    Permutation inv;
    inv.map_.resize(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) inv.map_[map_[i]] = i;
    return inv;
  }

  std::vector<long long> one_based() const {
    std::vector<long long> out(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) out[i] = static_cast<long long>(map_[i]) + 1;
    return out;
  }

  /// Dense permutation matrix; only for small n and tests.
  Eigen::MatrixXd matrix() const {
    const auto n = static_cast<Eigen::Index>(map_.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, static_cast<Eigen::Index>(map_[i])) = 1.0;
    return m;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  /// Lexicographic order of the maps.
  friend auto operator<=>(const Permutation& a, const Permutation& b) { return a.map_ <=> b.map_; }

 private:
  std::vector<std::size_t> map_;
};

/// (a o b)(i) = a(b(i)).
inline Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw DimensionError("compose: size mismatch");
  std::vector<std::size_t> m(a.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = a(b(i));
  return Permutation::from_map(std::move(m));
}

/// Permutation whose matrix is P_a * P_b, i.e. i -> b(a(i)).
inline Permutation matrix_product(const Permutation& a, const Permutation& b) { return compose(b, a); }

/// out = P v, out_i = v_{p(i)}.
inline Eigen::VectorXd apply(const Permutation& p, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != p.size()) throw DimensionError("apply: size mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(static_cast<Eigen::Index>(p(static_cast<std::size_t>(i))));
  return out;
}

/// out = P^T v, out_{p(i)} = v_i.
inline Eigen::VectorXd apply_transpose(const Permutation& p, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != p.size())
    throw DimensionError("apply_transpose: size mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(p(static_cast<std::size_t>(i)))) = v(i);
  return out;
}

/// Row permutation P X.
inline Eigen::MatrixXd apply_rows(const Permutation& p, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.rows()) != p.size()) throw DimensionError("apply_rows: size mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = x.row(static_cast<Eigen::Index>(p(static_cast<std::size_t>(i))));
  return out;
}

/// Counts n_k of k-cycles, k = 1..n.
class CycleType {
 public:
  CycleType() = default;

  /// Validates sum_k k*n_k == n.
  CycleType(std::size_t n, std::map<std::size_t, std::size_t> counts) : n_(n) {
    std::size_t total = 0;
    for (auto [k, c] : counts) {
      if (k == 0 || k > n) throw InvalidArgument("cycle length out of range");
      total += k * c;
      if (c > 0) counts_[k] = c;
    }
    if (total != n || n == 0) throw InvalidArgument("cycle type does not partition n");
  }

  /// Parses "k:count" pairs separated by ',' or ';', e.g. "1:2,3:1".
  /// n is inferred as sum k*count.
  static CycleType parse(std::string_view text) {
    std::map<std::size_t, std::size_t> counts;
    std::size_t n = 0;
    std::string s(text);
    std::replace(s.begin(), s.end(), ';', ',');
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto colon = item.find(':');
      if (colon == std::string::npos) throw InvalidArgument("cycle type entry must be k:count: " + item);
      std::size_t k = 0, c = 0;
      try {
        k = std::stoul(item.substr(0, colon));
        c = std::stoul(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw InvalidArgument("cycle type entry must be k:count: " + item);
      }
      counts[k] += c;
      n += k * c;
    }
    return CycleType(n, std::move(counts));
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t count(std::size_t k) const {
    auto it = counts_.find(k);
    return it == counts_.end() ? 0 : it->second;
  }
  const std::map<std::size_t, std::size_t>& counts() const noexcept { return counts_; }
  std::size_t fixed_points() const { return count(1); }

  /// #c, the total number of cycles.
  std::size_t total_cycles() const {
    std::size_t c = 0;
    for (auto [k, nk] : counts_) c += nk;
    return c;
  }

  std::string to_string(char sep = ',') const {
    std::string out;
    for (auto [k, c] : counts_) {
      if (!out.empty()) out += sep;
      out += std::to_string(k) + ":" + std::to_string(c);
    }
    return out;
  }

  friend bool operator==(const CycleType&, const CycleType&) = default;

 private:
  std::size_t n_ = 0;
  std::map<std::size_t, std::size_t> counts_;
};

inline CycleType cycle_type(const Permutation& p) {
  const std::size_t n = p.size();
  std::vector<char> visited(n, 0);
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::size_t len = 0;
    for (std::size_t i = start; !visited[i]; i = p(i)) {
      visited[i] = 1;
      ++len;
    }
    ++counts[len];
  }
  return CycleType(n, std::move(counts));
}

/// Fraction of indices on which a and b agree, (1/n) Tr(A^T B).
inline double overlap(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw DimensionError("overlap: size mismatch");
  if (a.size() == 0) throw DimensionError("overlap: empty permutations");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) agree += a(i) == b(i);
  return static_cast<double>(agree) / static_cast<double>(a.size());
}

/// Fisher-Yates shuffle of the identity; every permutation has probability 1/n!.
inline Permutation sample_uniform(std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidArgument("sample_uniform: n must be positive");
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(m[i], m[j]);
  }
  return Permutation::from_map(std::move(m));
}

/// Uniform derangement by rejection from the uniform law (about e draws each).
inline Permutation sample_derangement(std::size_t n, Rng& rng) {
  if (n < 2) throw InvalidArgument("sample_derangement: no derangement of fewer than 2 points");
  for (;;) {
    Permutation p = sample_uniform(n, rng);
    if (cycle_type(p).fixed_points() == 0) return p;
  }
}

/// D(m) = (m-1)(D(m-1) + D(m-2)), D(0) = 1, D(1) = 0.
inline BigInt derangements(std::size_t m) {
  BigInt prev2 = 1, prev1 = 0;
  if (m == 0) return prev2;
  for (std::size_t k = 2; k <= m; ++k) {
    BigInt next = BigInt(k - 1) * (prev1 + prev2);
    prev2 = std::move(prev1);
    prev1 = std::move(next);
  }
  return prev1;
}

inline BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline BigInt factorial(std::size_t n) {
  BigInt r = 1;
  for (std::size_t i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Number of permutations of n points with exactly n1 fixed points,
/// C(n, n1) * D(n - n1).
inline BigInt count_with_fixed_points(std::size_t n, std::size_t n1) {
  if (n1 > n) throw InvalidArgument("count_with_fixed_points: n1 > n");
  if (n >= 1 && n1 == n - 1)
    throw InvalidArgument("count_with_fixed_points: no permutation has exactly n-1 fixed points");
  return binomial(n, n1) * derangements(n - n1);
}

/// The cruder count C(n, n1) * (n - n1)! = n!/n1!, an upper bound on the above.
inline BigInt count_with_fixed_points_upper(std::size_t n, std::size_t n1) {
  if (n1 > n) throw InvalidArgument("count_with_fixed_points_upper: n1 > n");
  return binomial(n, n1) * factorial(n - n1);
}

/// "[2,1,4,3]" style 1-based text.
inline std::string to_string(const Permutation& p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(p(i) + 1);
  }
  return out + "]";
}

inline Permutation parse_permutation(std::string_view text) {
  std::string s(text);
  for (char& c : s)
    if (c == '[' || c == ']' || c == ',') c = ' ';
  std::stringstream ss(s);
  std::vector<long long> values;
  long long v;
  while (ss >> v) values.push_back(v);
  if (!ss.eof()) throw InvalidArgument("malformed permutation text");
  if (values.empty()) throw InvalidArgument("empty permutation text");
  return Permutation::from_one_based(values);
}

}  // namespace slr
