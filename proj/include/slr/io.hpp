#pragma once

// JSON documents for instances, estimates and configs; CSV tables for sweeps.
// CSV floats use 17 significant digits, LF line endings.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "slr/error.hpp"
#include "slr/estimators.hpp"
#include "slr/mc.hpp"
#include "slr/model.hpp"
#include "slr/perm.hpp"

namespace slr {

using nlohmann::json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180 quoting when the cell holds a comma, quote or newline.
inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace detail {

inline json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Eigen::VectorXd vector_from_json(const json& a, const char* what) {
  if (!a.is_array()) throw InvalidArgument(std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

/// Finite numbers as numbers, infinities as the strings "inf" / "-inf".
inline json real_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double real_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidArgument("expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) throw InvalidArgument(std::string(what) + ": unknown key '" + it.key() + "'");
}

template <class Fn>
decltype(auto) wrap_json_errors(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace detail

inline json permutation_json(const Permutation& p) { return p.one_based(); }

inline Permutation permutation_from_json(const json& j) {
  return detail::wrap_json_errors([&] { return Permutation::from_one_based(j.get<std::vector<long long>>()); });
}

// ---- instances -------------------------------------------------------------

inline json to_json(const Instance& inst) {
  json X = json::array();
  for (Eigen::Index i = 0; i < inst.X.rows(); ++i) X.push_back(detail::vector_json(inst.X.row(i).transpose()));
  return {{"format", "slr-instance"},
          {"version", 1},
          {"n", inst.n},
          {"d", inst.d},
          {"seed", inst.seed},
          {"sigma", inst.sigma},
          {"snr", detail::real_json(snr_of(inst))},
          {"X", X},
          {"beta_star", detail::vector_json(inst.beta_star)},
          {"pi_star", permutation_json(inst.pi_star)},
          {"w", detail::vector_json(inst.w)},
          {"y", detail::vector_json(inst.y)}};
}

inline Instance instance_from_json(const json& j) {
  return detail::wrap_json_errors([&] {
    Instance inst;
    inst.n = j.at("n").get<std::size_t>();
    inst.d = j.at("d").get<std::size_t>();
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.sigma = j.value("sigma", 0.0);
    const json& X = j.at("X");
    if (X.size() != inst.n) throw DimensionError("instance: X must have n rows");
    inst.X.resize(static_cast<Eigen::Index>(inst.n), static_cast<Eigen::Index>(inst.d));
    for (std::size_t i = 0; i < inst.n; ++i) {
      const Eigen::VectorXd row = detail::vector_from_json(X[i], "X row");
      if (row.size() != static_cast<Eigen::Index>(inst.d)) throw DimensionError("instance: X row must have d entries");
      inst.X.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    inst.y = detail::vector_from_json(j.at("y"), "y");
    if (inst.y.size() != static_cast<Eigen::Index>(inst.n)) throw DimensionError("instance: y must have n entries");
    inst.beta_star = j.contains("beta_star") ? detail::vector_from_json(j["beta_star"], "beta_star")
                                             : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.d));
    inst.pi_star = j.contains("pi_star") ? permutation_from_json(j["pi_star"]) : Permutation(inst.n);
    inst.w = j.contains("w") ? detail::vector_from_json(j["w"], "w")
                             : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.n));
    if (inst.pi_star.size() != inst.n || inst.w.size() != static_cast<Eigen::Index>(inst.n) ||
        inst.beta_star.size() != static_cast<Eigen::Index>(inst.d))
      throw DimensionError("instance: inconsistent sizes");
    return inst;
  });
}

// ---- estimates -------------------------------------------------------------

inline json to_json(const NetSpec& net) {
  return {{"center", detail::vector_json(net.center)},
          {"radius", net.radius},
          {"delta", net.delta},
          {"budget", net.budget},
          {"cardinality_bound", net.cardinality_bound()}};
}

inline json to_json(const Estimate& e) {
  json stats = {{"candidates", e.stats.candidates},
                {"iterations", e.stats.iterations},
                {"degenerate_ties", e.stats.degenerate_ties}};
  if (e.stats.net) stats["net"] = to_json(*e.stats.net);
  if (!e.stats.residual_trace.empty()) stats["residual_trace"] = e.stats.residual_trace;
  return {{"solver", std::string(solver_name(e.solver))},
          {"pi_hat", permutation_json(e.pi_hat)},
          {"beta_hat", detail::vector_json(e.beta_hat)},
          {"residual_sq", e.residual_sq},
          {"qap_objective", e.qap_objective},
          {"stats", stats}};
}

// ---- configs ---------------------------------------------------------------

/// Keys: n, d, and one of snr | snr_exponent | sigma; optional beta_norm,
/// beta_direction (first_axis | random_sphere), pi_law (uniform | identity |
/// fixed) and fixed_pi (1-based).
inline ModelConfig model_config_from_json(const json& j) {
  detail::reject_unknown_keys(
      j, {"n", "d", "snr", "snr_exponent", "sigma", "beta_norm", "beta_direction", "pi_law", "fixed_pi"},
      "model config");
  return detail::wrap_json_errors([&] {
    ModelConfig c;
    c.n = j.at("n").get<std::size_t>();
    c.d = j.value("d", std::size_t{1});
    c.beta_norm = j.value("beta_norm", 1.0);
    const int given = int(j.contains("snr")) + int(j.contains("snr_exponent")) + int(j.contains("sigma"));
    if (given > 1) throw InvalidArgument("model config: give only one of snr, snr_exponent, sigma");
    if (j.contains("snr")) c.snr = detail::real_from_json(j["snr"]);
    if (j.contains("snr_exponent")) c.snr_exponent = detail::real_from_json(j["snr_exponent"]);
    if (j.contains("sigma")) {
      const double sigma = j["sigma"].get<double>();
      if (!(sigma >= 0.0)) throw InvalidArgument("model config: sigma must be non-negative");
      c.snr = sigma == 0.0 ? kNoiseless : c.beta_norm * c.beta_norm / (sigma * sigma);
    }
    const auto dir = j.value("beta_direction", std::string("first_axis"));
    if (dir == "first_axis")
      c.beta_direction = BetaDirection::first_axis;
    else if (dir == "random_sphere")
      c.beta_direction = BetaDirection::random_sphere;
    else
      throw InvalidArgument("model config: unknown beta_direction " + dir);
    const auto law = j.value("pi_law", std::string("uniform"));
    if (law == "uniform")
      c.pi_law = PiLaw::uniform;
    else if (law == "identity")
      c.pi_law = PiLaw::identity;
    else if (law == "fixed")
      c.pi_law = PiLaw::fixed;
    else
      throw InvalidArgument("model config: unknown pi_law " + law);
    if (j.contains("fixed_pi")) c.fixed_pi = permutation_from_json(j["fixed_pi"]);
    return c;
  });
}

inline SolverConfig solver_config_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"name", "net_budget", "alt_min_iters", "brute_force_cap"}, "solver config");
  return detail::wrap_json_errors([&] {
    SolverConfig s;
    if (j.contains("name") && j["name"].get<std::string>() != "auto") s.solver = parse_solver(j["name"].get<std::string>());
    s.net_budget = j.value("net_budget", s.net_budget);
    s.alt_min_iters = j.value("alt_min_iters", s.alt_min_iters);
    s.brute_force_cap = j.value("brute_force_cap", s.brute_force_cap);
    return s;
  });
}

/// Keys mirror ExperimentGrid: n_values, d_values, snr_exponents,
/// trials_per_cell, solver {name, net_budget, alt_min_iters, brute_force_cap},
/// master_seed, max_work, record_timing.
inline ExperimentGrid grid_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"n_values", "d_values", "snr_exponents", "trials_per_cell", "solver", "master_seed",
                               "max_work", "record_timing"},
                              "grid config");
  return detail::wrap_json_errors([&] {
    ExperimentGrid g;
    g.n_values = j.at("n_values").get<std::vector<std::size_t>>();
    if (j.contains("d_values")) g.d_values = j["d_values"].get<std::vector<std::size_t>>();
    g.snr_exponents.clear();
    for (const json& c : j.at("snr_exponents")) g.snr_exponents.push_back(detail::real_from_json(c));
    g.trials_per_cell = j.value("trials_per_cell", g.trials_per_cell);
    if (j.contains("solver")) g.solver = solver_config_from_json(j["solver"]);
    g.master_seed = j.value("master_seed", g.master_seed);
    g.max_work = j.value("max_work", g.max_work);
    g.record_timing = j.value("record_timing", g.record_timing);
    g.validate();
    return g;
  });
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("cannot parse " + path + ": " + e.what());
  }
}

// ---- sweep outputs ---------------------------------------------------------

inline constexpr const char* kTrialsHeader = "n,d,snr_exponent,trial,seed,exact,overlap,residual_sq,wall_time_ms";
inline constexpr const char* kSummaryHeader =
    "n,d,snr_exponent,trials,recovery_rate,recovery_se,mean_overlap,overlap_se";

inline void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kTrialsHeader << '\n';
  for (const TrialRecord& r : records)
    out << r.cell.n << ',' << r.cell.d << ',' << format_double(r.cell.snr_exponent) << ',' << r.trial_index << ','
        << r.seed << ',' << (r.exact ? 1 : 0) << ',' << format_double(r.overlap) << ','
        << format_double(r.residual_sq) << ',' << format_double(r.wall_time_ms) << '\n';
}

inline void write_summary_csv(std::ostream& out, const GridSummary& summary) {
  out << kSummaryHeader << '\n';
  for (const CellSummary& s : summary)
    out << s.cell.n << ',' << s.cell.d << ',' << format_double(s.cell.snr_exponent) << ',' << s.trials << ','
        << format_double(s.recovery_rate) << ',' << format_double(s.recovery_se) << ','
        << format_double(s.mean_overlap) << ',' << format_double(s.overlap_se) << '\n';
}

inline json to_json(const Transition& t) {
  json j = {{"n", t.n},
            {"d", t.d},
            {"metric", t.metric == Metric::recovery ? "recovery_rate" : "mean_overlap"},
            {"level", t.level},
            {"found", t.found}};
  if (t.found) {
    j["exponent"] = t.exponent;
    j["bracket"] = {t.lower, t.upper};
  }
  return j;
}

}  // namespace slr
