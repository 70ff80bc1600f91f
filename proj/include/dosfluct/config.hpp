#pragma once

// Configuration parsing, canonical serialization and result writers.
//
// Configs and summaries are JSON, sample-level data is CSV. Doubles in CSV use
// 17 significant digits; JSON uses the shortest round-trip representation.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dosfluct/constants.hpp"
#include "dosfluct/errors.hpp"
#include "dosfluct/experiments.hpp"
#include "dosfluct/torus_function.hpp"

#ifndef DOSFLUCT_VERSION
#define DOSFLUCT_VERSION "0.0.0"
#endif

namespace dosfluct {

using json = nlohmann::json;

inline const char* version() { return DOSFLUCT_VERSION; }

// ---------------------------------------------------------------------------
// Config parsing.

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

template <class T>
T get_field(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + key + "': missing or of the wrong type");
  }
}

inline double get_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError("field '" + key + "': expected a number");
  return j.at(key).get<double>();
}

inline std::uint64_t get_unsigned(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number_integer() ||
      (!j.at(key).is_number_unsigned() && j.at(key).get<std::int64_t>() < 0)) {
    throw ConfigError("field '" + key + "': expected a nonnegative integer");
  }
  return j.at(key).get<std::uint64_t>();
}

inline std::vector<double> get_number_list(const json& j, const std::string& key) {
  if (!j.at(key).is_array()) throw ConfigError("field '" + key + "': expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError("field '" + key + "': expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

/// F given as a TorusFunction object or one of the shorthands "cos", "zero".
inline TorusFunction parse_function(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "cos") return TorusFunction::cosine(1);
    if (s == "zero") return TorusFunction::constant(0.0);
    throw ConfigError("F: unknown shorthand '" + s + "' (use \"cos\", \"zero\" or a coefficient object)");
  }
  return j.get<TorusFunction>();
}

inline Model parse_model(const std::string& s) {
  if (s == "decaying_potential") return Model::decaying_potential;
  if (s == "dc") return Model::dc;
  throw ConfigError("model: expected 'decaying_potential' or 'dc', got '" + s + "'");
}

inline Regime parse_regime(const std::string& s) {
  if (s == "supercritical") return Regime::supercritical;
  if (s == "critical") return Regime::critical;
  if (s == "subcritical") return Regime::subcritical;
  throw ConfigError("regime: expected 'supercritical', 'critical' or 'subcritical', got '" + s + "'");
}

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  detail::reject_unknown(j,
                         {"model", "regime", "F", "alpha", "delta", "kappas", "t_grid", "n_list", "paths", "dt",
                          "substeps", "seed", "D", "subsequence"},
                         "config");
  if (j.contains("delta")) {
    throw ConfigError("delta: logarithmic envelopes are available through the 'envelope' subcommand only");
  }
  for (const char* key : {"model", "regime", "alpha", "kappas", "paths"}) {
    if (!j.contains(key)) throw ConfigError(std::string("config: missing required field '") + key + "'");
  }
  ExperimentConfig cfg;
  cfg.model = parse_model(detail::get_field<std::string>(j, "model"));
  cfg.regime = parse_regime(detail::get_field<std::string>(j, "regime"));
  if (j.contains("F")) cfg.F = parse_function(j.at("F"));
  cfg.alpha = detail::get_number(j, "alpha");
  if (!j.at("kappas").is_array()) throw ConfigError("kappas: expected an array of [kappa1, kappa2] pairs");
  for (const auto& p : j.at("kappas")) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ConfigError("kappas: expected an array of [kappa1, kappa2] pairs");
    }
    cfg.kappas.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  if (j.contains("t_grid")) cfg.t_grid = detail::get_number_list(j, "t_grid");
  if (j.contains("n_list")) cfg.n_list = detail::get_number_list(j, "n_list");
  cfg.paths = static_cast<std::size_t>(detail::get_unsigned(j, "paths"));
  if (j.contains("dt")) cfg.dt = detail::get_number(j, "dt");
  if (j.contains("substeps")) cfg.substeps = static_cast<int>(detail::get_unsigned(j, "substeps"));
  if (j.contains("seed")) cfg.seed = detail::get_unsigned(j, "seed");
  if (j.contains("D")) {
    cfg.D = static_cast<int>(detail::get_unsigned(j, "D"));
    if (cfg.D < 1) throw ConfigError("D: must be >= 1");
  }
  if (j.contains("subsequence")) {
    const auto& s = j.at("subsequence");
    if (!s.is_object()) throw ConfigError("subsequence: expected an object");
    detail::reject_unknown(s, {"gamma1", "gamma2", "count", "n_max"}, "subsequence");
    SubsequenceConfig sc;
    sc.gamma1 = detail::get_number(s, "gamma1");
    sc.gamma2 = detail::get_number(s, "gamma2");
    sc.count = static_cast<std::size_t>(detail::get_unsigned(s, "count"));
    sc.n_max = static_cast<std::int64_t>(detail::get_unsigned(s, "n_max"));
    cfg.subsequence = sc;
  }
  return validated(cfg);
}

/// Parses and validates a JSON config document, filling defaults.
inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// Canonical JSON form; parse_config(config_to_json(c).dump()) == c for validated c.
inline json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = to_string(cfg.model);
  j["regime"] = to_string(cfg.regime);
  j["F"] = cfg.F;
  j["alpha"] = cfg.alpha;
  json pairs = json::array();
  for (const auto& p : cfg.kappas) pairs.push_back({p.kappa1, p.kappa2});
  j["kappas"] = pairs;
  j["t_grid"] = cfg.t_grid;
  j["n_list"] = cfg.n_list;
  j["paths"] = cfg.paths;
  j["dt"] = cfg.dt;
  j["substeps"] = cfg.substeps;
  j["seed"] = cfg.seed;
  j["D"] = cfg.D;
  if (cfg.subsequence) {
    const auto& s = *cfg.subsequence;
    j["subsequence"] = {{"gamma1", s.gamma1}, {"gamma2", s.gamma2}, {"count", s.count}, {"n_max", s.n_max}};
  }
  return j;
}

/// FNV-1a over the canonical config text, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Result serialization.

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Throws ConsistencyError if any number in j is NaN or infinite.
inline void require_finite(const json& j, const std::string& path = "$") {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw ConsistencyError("non-finite value at " + path);
  }
  if (j.is_object()) {
    for (const auto& [key, v] : j.items()) require_finite(v, path + "." + key);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], path + "[" + std::to_string(i) + "]");
  }
}

inline json constants_json(const TorusFunction& F, double kappa, int D,
                           GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  const ConstantsTable table = compute_Ck(F, kappa, D, conv);
  json c = json::array();
  for (const auto& v : table.values) c.push_back({v.real(), v.imag()});
  json j{{"kappa", kappa},
         {"C", c},
         {"sigma2", sigma2_kappa(F, kappa, conv)},
         {"sigma2_zero", sigma2_zero(F, conv)}};
  require_finite(j);
  return j;
}

inline json subsequence_json(const SubsequenceSpec& s) {
  return {{"kappa", s.kappa},         {"gamma_target", s.gamma_target}, {"members", s.members},
          {"achieved", s.achieved},   {"tolerance", s.tolerance},       {"shortfall", s.shortfall},
          {"rational", s.rational}};
}

inline json summary_to_json(const FluctuationSummary& s, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["version"] = version();
  j["config"] = config_to_json(s.config);
  json cells = json::array();
  for (const auto& c : s.cells) {
    cells.push_back({{"kappa1", c.pair.kappa1},
                     {"kappa2", c.pair.kappa2},
                     {"n", c.n},
                     {"t", c.t},
                     {"samples", c.samples},
                     {"normalization", c.normalization},
                     {"mean_excess", c.mean_excess},
                     {"mean_excess_se", c.mean_excess_se},
                     {"drift", c.drift},
                     {"mean_fluctuation", c.mean_fluctuation},
                     {"variance", c.variance},
                     {"variance_se", c.variance_se},
                     {"predicted_variance", c.predicted_variance},
                     {"theta_gap_variance", c.theta_gap_variance},
                     {"skewness", c.normality.skewness},
                     {"excess_kurtosis", c.normality.excess_kurtosis},
                     {"ks_statistic", c.normality.ks_statistic},
                     {"degenerate", c.normality.degenerate}});
  }
  j["cells"] = cells;
  auto covs = [](const std::vector<CovarianceCheck>& v) {
    json a = json::array();
    for (const auto& c : v) {
      a.push_back({{"cell_a", c.cell_a}, {"cell_b", c.cell_b}, {"sample", c.sample}, {"se", c.se},
                   {"predicted", c.predicted}});
    }
    return a;
  };
  j["pair_covariances"] = covs(s.pair_covariances);
  j["time_covariances"] = covs(s.time_covariances);
  json scaling = json::array();
  for (const auto& sc : s.scaling) {
    scaling.push_back({{"pair_index", sc.pair_index},
                       {"t", sc.t},
                       {"n", sc.n_values},
                       {"variance", sc.variances},
                       {"exponent", sc.fit.exponent},
                       {"intercept", sc.fit.intercept},
                       {"r2", sc.fit.r2},
                       {"expected_exponent", sc.expected_exponent}});
  }
  j["scaling"] = scaling;
  json growth = json::array();
  for (const auto& lg : s.log_growth) {
    growth.push_back({{"pair_index", lg.pair_index},
                      {"n", lg.n_values},
                      {"variance", lg.variances},
                      {"variance_per_log", lg.variance_per_log},
                      {"slope", lg.fit.slope},
                      {"intercept", lg.fit.intercept},
                      {"r2", lg.fit.r2},
                      {"predicted_per_log", lg.predicted_per_log}});
  }
  j["log_growth"] = growth;
  if (s.subsequence) {
    const auto& r = *s.subsequence;
    json law = json::array();
    for (const auto& [value, freq] : r.discrepancy_law) law.push_back({{"value", value}, {"frequency", freq}});
    std::vector<std::int64_t> evaluated;
    for (auto m : r.evaluated_members) evaluated.push_back(r.subsequence.first.members[m]);
    j["subsequence"] = {{"first", subsequence_json(r.subsequence.first)},
                        {"second", subsequence_json(r.subsequence.second)},
                        {"evaluated_n", evaluated},
                        {"tail_threshold", r.tail_threshold},
                        {"tail_scale", r.tail_scale},
                        {"fraction_tail_below", r.fraction_tail_below},
                        {"fraction_identity", r.fraction_identity},
                        {"fraction_zero", r.fraction_zero},
                        {"total_variation", r.total_variation},
                        {"discrepancy_law", law}};
  }
  require_finite(j);
  return j;
}

/// path_index,kappa1,kappa2,n,t,raw_count,fluctuation,normalized
inline void write_samples_csv(std::ostream& os, const FluctuationSummary& s, const std::string& hash) {
  os << "# config_hash=" << hash << "\n";
  os << "path_index,kappa1,kappa2,n,t,raw_count,fluctuation,normalized\n";
  for (const auto& x : s.samples) {
    const auto& pr = s.config.kappas[x.pair];
    os << x.path << ',' << format_double(pr.kappa1) << ',' << format_double(pr.kappa2) << ',' << format_double(x.n)
       << ',' << format_double(x.t) << ',' << x.raw_count << ',' << format_double(x.fluctuation) << ','
       << format_double(x.normalized) << '\n';
  }
}

/// One row per path and evaluated subsequence member.
inline void write_subsequence_csv(std::ostream& os, const FluctuationSummary& s, const std::string& hash) {
  os << "# config_hash=" << hash << "\n";
  os << "path_index,n,discrepancy,theta_tilde1,theta_tilde2,predicted,tail_oscillation,identity_holds\n";
  if (!s.subsequence) return;
  const auto& r = *s.subsequence;
  for (const auto& rec : r.records) {
    for (std::size_t i = 0; i < r.evaluated_members.size(); ++i) {
      os << rec.path << ',' << r.subsequence.first.members[r.evaluated_members[i]] << ',' << rec.discrepancy[i] << ','
         << format_double(rec.theta_tilde1[i]) << ',' << format_double(rec.theta_tilde2[i]) << ',' << rec.predicted
         << ',' << format_double(rec.tail_oscillation) << ',' << (rec.identity_holds ? 1 : 0) << '\n';
    }
  }
}

/// kappa1,kappa2,t,n,variance,prediction for external plotting.
inline void write_plot_csv(std::ostream& os, const FluctuationSummary& s, const std::string& hash) {
  os << "# config_hash=" << hash << "\n";
  os << "kappa1,kappa2,t,n,variance,prediction\n";
  for (const auto& c : s.cells) {
    os << format_double(c.pair.kappa1) << ',' << format_double(c.pair.kappa2) << ',' << format_double(c.t) << ','
       << format_double(c.n) << ',' << format_double(c.variance) << ',' << format_double(c.predicted_variance)
       << '\n';
  }
}

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = dosfluct::version();
  double wall_clock_seconds = 0.0;
  std::map<std::string, std::string> outputs;  // role -> path
};

inline json manifest_to_json(const RunManifest& m) {
  return {{"config_hash", m.config_hash},
          {"seed", m.seed},
          {"version", m.version},
          {"wall_clock_seconds", m.wall_clock_seconds},
          {"outputs", m.outputs}};
}

}  // namespace dosfluct
