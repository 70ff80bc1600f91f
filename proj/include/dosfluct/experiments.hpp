#pragma once

// Monte Carlo ensembles for the second-order asymptotics of N_n(kappa1, kappa2).
//
// Every path is simulated end to end by one worker (sample -> integrate ->
// count) and stored at its path index; all reductions run afterwards in index
// order, so results do not depend on the number of workers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dosfluct/constants.hpp"
#include "dosfluct/envelope.hpp"
#include "dosfluct/errors.hpp"
#include "dosfluct/path.hpp"
#include "dosfluct/predictions.hpp"
#include "dosfluct/pruefer.hpp"
#include "dosfluct/stats.hpp"
#include "dosfluct/subsequence.hpp"
#include "dosfluct/torus_function.hpp"

namespace dosfluct {

enum class Regime { supercritical, critical, subcritical };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::supercritical: return "supercritical";
    case Regime::critical: return "critical";
    case Regime::subcritical: return "subcritical";
  }
  return "?";
}

inline const char* to_string(Model m) { return m == Model::dc ? "dc" : "decaying_potential"; }

struct SubsequenceConfig {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::size_t count = 0;
  std::int64_t n_max = 0;

  friend bool operator==(const SubsequenceConfig&, const SubsequenceConfig&) = default;
};

struct ExperimentConfig {
  Model model = Model::decaying_potential;
  Regime regime = Regime::subcritical;
  TorusFunction F = TorusFunction::cosine(1);
  double alpha = 0.3;
  std::vector<KappaPair> kappas;
  std::vector<double> t_grid{0.25, 0.5, 0.75, 1.0};
  std::vector<double> n_list;
  std::size_t paths = 0;
  double dt = 1e-3;
  int substeps = 1;
  std::uint64_t seed = 0;
  int D = 0;  // 0 -> default_order(alpha)
  std::optional<SubsequenceConfig> subsequence;
  unsigned workers = 0;  // 0 -> DOSFLUCT_WORKERS or hardware concurrency

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline Regime regime_of(double alpha) {
  if (std::abs(alpha - 0.5) <= 1e-12) return Regime::critical;
  return alpha > 0.5 ? Regime::supercritical : Regime::subcritical;
}

/// Checks the invariants of a config and fills defaulted fields.
inline ExperimentConfig validated(ExperimentConfig cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha: must be positive");
  if (regime_of(cfg.alpha) != cfg.regime) {
    throw ConfigError(std::string("regime: '") + to_string(cfg.regime) + "' is inconsistent with alpha = " +
                      std::to_string(cfg.alpha) + " (supercritical needs alpha > 1/2, critical alpha = 1/2, " +
                      "subcritical alpha < 1/2)");
  }
  if (cfg.regime == Regime::critical && cfg.model == Model::decaying_potential && cfg.n_list.size() < 1) {
    throw ConfigError("n_list: the critical regime needs at least one box length");
  }
  if (!cfg.F.real_valued()) throw ConfigError("F: the potential must be real-valued");
  if (std::abs(mean(cfg.F)) > 1e-14) throw ConfigError("F: must have zero mean");
  if (cfg.kappas.empty()) throw ConfigError("kappas: at least one (kappa1, kappa2) pair is required");
  for (const auto& p : cfg.kappas) {
    if (!(p.kappa1 > 0.0) || !(p.kappa1 < p.kappa2)) throw ConfigError("kappas: each pair needs 0 < kappa1 < kappa2");
  }
  if (cfg.paths < 2) throw ConfigError("paths: must be >= 2");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt: must be positive");
  if (cfg.substeps < 1) throw ConfigError("substeps: must be >= 1");
  if (cfg.D == 0) cfg.D = default_order(cfg.alpha);
  if (cfg.D < 1) throw ConfigError("D: must be >= 1");
  for (double t : cfg.t_grid) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("t_grid: entries must lie in (0, 1]");
  }
  std::sort(cfg.t_grid.begin(), cfg.t_grid.end());
  cfg.t_grid.erase(std::unique(cfg.t_grid.begin(), cfg.t_grid.end()), cfg.t_grid.end());
  for (double n : cfg.n_list) {
    if (!(n > 1.0)) throw ConfigError("n_list: box lengths must exceed 1");
  }
  std::sort(cfg.n_list.begin(), cfg.n_list.end());
  cfg.n_list.erase(std::unique(cfg.n_list.begin(), cfg.n_list.end()), cfg.n_list.end());

  const bool needs_subsequence =
      cfg.regime == Regime::supercritical || (cfg.model == Model::dc && cfg.regime == Regime::critical);
  if (needs_subsequence) {
    if (!cfg.subsequence) throw ConfigError("subsequence: required for this regime");
    if (cfg.kappas.size() != 1) throw ConfigError("kappas: subsequence experiments take exactly one pair");
    const auto& s = *cfg.subsequence;
    if (!(s.gamma1 >= 0.0 && s.gamma1 < kPi) || !(s.gamma2 >= 0.0 && s.gamma2 < kPi)) {
      throw ConfigError("subsequence.gamma: must lie in [0, pi)");
    }
    if (s.count < 3) throw ConfigError("subsequence.count: must be >= 3");
    if (s.n_max < 2) throw ConfigError("subsequence.n_max: must be >= 2");
  } else if (cfg.n_list.empty()) {
    throw ConfigError("n_list: at least one box length is required");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Parallel execution.

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DOSFLUCT_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on `workers` threads; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Single-path simulation.

/// theta_tilde(kappa_q) at each checkpoint (ascending), for one seeded path.
/// Result is indexed [checkpoint][kappa].
inline std::vector<std::vector<double>> simulate_checkpoints(const Potential& potential,
                                                             const std::vector<double>& kappas,
                                                             const std::vector<double>& checkpoints, double dt,
                                                             int substeps, SeedPair seed) {
  if (checkpoints.empty()) return {};
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) || !(checkpoints.front() > 0.0)) {
    throw DomainError("simulate_checkpoints: checkpoints must be positive and ascending");
  }
  const TimeGrid grid = TimeGrid::cover(checkpoints.back(), std::min(dt, checkpoints.back()));
  PathStream stream(seed, grid.dt);
  PrueferIntegrator integrator(potential, kappas, substeps);
  std::vector<std::vector<double>> out;
  out.reserve(checkpoints.size());
  std::size_t next = 0;
  double prev_t = 0.0;
  std::vector<double> prev(kappas.size(), 0.0);
  auto capture = [&](double t) {
    const auto& cur = integrator.theta_tilde();
    while (next < checkpoints.size() && checkpoints[next] <= t + 1e-9 * std::max(1.0, t)) {
      const double c = checkpoints[next];
      const double w = t > prev_t ? std::clamp((c - prev_t) / (t - prev_t), 0.0, 1.0) : 1.0;
      std::vector<double> row(kappas.size());
      for (std::size_t q = 0; q < kappas.size(); ++q) row[q] = prev[q] + w * (cur[q] - prev[q]);
      out.push_back(std::move(row));
      ++next;
    }
    prev_t = t;
    prev = cur;
  };
  for (std::size_t j = 0; j < grid.steps && next < checkpoints.size(); ++j) {
    const double x0 = stream.position();
    const double inc = stream.advance();
    integrator.step(grid.time(j), grid.dt, x0, inc, capture);
  }
  while (next < checkpoints.size()) {
    out.push_back(integrator.theta_tilde());
    ++next;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Results.

struct Sample {
  std::size_t path = 0;
  std::size_t pair = 0;
  double n = 0.0;
  double t = 0.0;
  long long raw_count = 0;
  double excess = 0.0;       // N - nt (k2 - k1) / pi
  double fluctuation = 0.0;  // excess - drift
  double normalized = 0.0;   // fluctuation / normalization
  double theta_gap = 0.0;    // (theta_tilde(k2) - theta_tilde(k1)) / pi - drift
};

struct CellSummary {
  KappaPair pair;
  std::size_t pair_index = 0;
  double n = 0.0;
  double t = 0.0;
  std::size_t samples = 0;
  double normalization = 1.0;
  double mean_excess = 0.0;
  double mean_excess_se = 0.0;
  double drift = 0.0;
  double mean_fluctuation = 0.0;
  double variance = 0.0;  // of the normalized fluctuation
  double variance_se = 0.0;
  double predicted_variance = 0.0;
  double theta_gap_variance = 0.0;  // normalized, without the integer floors
  NormalityStats normality;
};

struct CovarianceCheck {
  std::size_t cell_a = 0;
  std::size_t cell_b = 0;
  double sample = 0.0;
  double se = 0.0;
  double predicted = 0.0;
};

struct ScalingCheck {
  std::size_t pair_index = 0;
  double t = 1.0;
  std::vector<double> n_values;
  std::vector<double> variances;  // of the unnormalized fluctuation
  ScalingFit fit;
  double expected_exponent = 0.0;
};

struct LogGrowthCheck {
  std::size_t pair_index = 0;
  std::vector<double> n_values;
  std::vector<double> variances;         // of the unnormalized fluctuation
  std::vector<double> variance_per_log;  // variances[i] / log n_i
  LinearFit fit;                         // variance = slope log n + intercept
  double predicted_per_log = 0.0;
};

struct SubsequencePathRecord {
  std::size_t path = 0;
  std::vector<long long> discrepancy;  // N_{n_k} - (floor_pi(n_k k2) - floor_pi(n_k k1)) per evaluated member
  std::vector<double> theta_tilde1;    // per evaluated member
  std::vector<double> theta_tilde2;
  double tail_oscillation = 0.0;
  long long predicted = 0;  // floor_pi(g2 + tt_inf(k2)) - floor_pi(g1 + tt_inf(k1))
  bool identity_holds = false;
};

struct SubsequenceReport {
  JointSubsequence subsequence;
  std::vector<std::size_t> evaluated_members;  // indices into subsequence members
  std::vector<SubsequencePathRecord> records;
  double tail_threshold = 0.1;
  double tail_scale = 0.0;  // sqrt(int_{n_K/2}^inf a^2), the martingale scale of the remaining motion
  double fraction_tail_below = 0.0;
  double fraction_identity = 0.0;  // supercritical: identity at the last three members
  double fraction_zero = 0.0;      // DC supercritical: all discrepancies zero at the last three members
  double total_variation = 0.0;    // DC critical: between the discrepancy laws at members k and 2k
  std::map<long long, std::vector<double>> discrepancy_law;  // value -> frequency per evaluated member
};

struct FluctuationSummary {
  ExperimentConfig config;
  std::vector<Sample> samples;
  std::vector<CellSummary> cells;
  std::vector<CovarianceCheck> pair_covariances;
  std::vector<CovarianceCheck> time_covariances;
  std::vector<ScalingCheck> scaling;
  std::vector<LogGrowthCheck> log_growth;
  std::optional<SubsequenceReport> subsequence;
};

// ---------------------------------------------------------------------------
// Fluctuation pipelines (subcritical, critical).

namespace detail {

inline std::vector<double> distinct_kappas(const std::vector<KappaPair>& pairs) {
  std::set<double> s;
  for (const auto& p : pairs) {
    s.insert(p.kappa1);
    s.insert(p.kappa2);
  }
  return {s.begin(), s.end()};
}

inline std::size_t index_of(const std::vector<double>& v, double x) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}

inline EnvelopeProfile envelope_for(const ExperimentConfig& cfg, double n) {
  if (cfg.model == Model::dc) return DcCoupling{cfg.alpha, n};
  return PowerDecay{cfg.alpha};
}

inline double normalization(const ExperimentConfig& cfg, double n) {
  return cfg.regime == Regime::critical ? std::sqrt(std::log(n)) : std::pow(n, 0.5 - cfg.alpha);
}

struct Cell {
  std::size_t pair;
  double n;
  double t;
};

inline std::vector<Cell> cells_of(const ExperimentConfig& cfg, const std::vector<double>& t_grid) {
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < cfg.kappas.size(); ++p) {
    for (double n : cfg.n_list) {
      for (double t : t_grid) cells.push_back({p, n, t});
    }
  }
  return cells;
}

}  // namespace detail

/// Shared implementation of the drift-subtracted, normalized fluctuation ensembles.
inline FluctuationSummary run_fluctuations(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = validated(raw);
  if (cfg.regime == Regime::supercritical) throw ConfigError("regime: use run_supercritical for alpha > 1/2");
  const std::vector<double> t_grid = cfg.regime == Regime::critical ? std::vector<double>{1.0} : cfg.t_grid;
  const auto kappas = detail::distinct_kappas(cfg.kappas);
  const auto cells = detail::cells_of(cfg, t_grid);

  // Predictions are fixed before any path is sampled.
  std::map<double, ConstantsTable> tables;
  for (double k : kappas) tables.emplace(k, compute_Ck(cfg.F, k, cfg.D));
  const CovarianceConstants cc = covariance_constants(cfg.F, kappas);
  std::vector<double> drift(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const auto& pr = cfg.kappas[cell.pair];
    drift[c] = drift_from_tables(tables.at(pr.kappa1), tables.at(pr.kappa2), detail::envelope_for(cfg, cell.n),
                                 cell.n * cell.t);
  }

  // Simulation groups: one path run covers every checkpoint of a group.
  std::vector<double> group_n;
  if (cfg.model == Model::dc) {
    group_n = cfg.n_list;
  } else {
    group_n = {0.0};
  }
  std::vector<std::vector<double>> group_checkpoints(group_n.size());
  for (std::size_t g = 0; g < group_n.size(); ++g) {
    std::set<double> cps;
    for (double n : cfg.n_list) {
      if (cfg.model == Model::dc && n != group_n[g]) continue;
      for (double t : t_grid) cps.insert(n * t);
    }
    group_checkpoints[g] = {cps.begin(), cps.end()};
  }

  const std::size_t per_path = cells.size();
  std::vector<Sample> samples(cfg.paths * per_path);
  parallel_for(cfg.paths, resolve_workers(cfg.workers), [&](std::size_t path) {
    const SeedPair seed{cfg.seed, path};
    for (std::size_t g = 0; g < group_n.size(); ++g) {
      const double n_env = cfg.model == Model::dc ? group_n[g] : cfg.n_list.back();
      const Potential potential{cfg.F, detail::envelope_for(cfg, n_env)};
      const auto tt = simulate_checkpoints(potential, kappas, group_checkpoints[g], cfg.dt, cfg.substeps, seed);
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        if (cfg.model == Model::dc && cell.n != group_n[g]) continue;
        const double time = cell.n * cell.t;
        const std::size_t row = detail::index_of(group_checkpoints[g], time);
        const auto& pr = cfg.kappas[cell.pair];
        const double tt1 = tt[row][detail::index_of(kappas, pr.kappa1)];
        const double tt2 = tt[row][detail::index_of(kappas, pr.kappa2)];
        Sample s;
        s.path = path;
        s.pair = cell.pair;
        s.n = cell.n;
        s.t = cell.t;
        s.raw_count = floor_pi(pr.kappa2 * time + tt2) - floor_pi(pr.kappa1 * time + tt1);
        s.excess = static_cast<double>(s.raw_count) - time * (pr.kappa2 - pr.kappa1) / kPi;
        s.fluctuation = s.excess - drift[c];
        s.normalized = s.fluctuation / detail::normalization(cfg, cell.n);
        s.theta_gap = (tt2 - tt1) / kPi - drift[c];
        samples[path * per_path + c] = s;
      }
    }
  });

  FluctuationSummary summary;
  summary.config = cfg;
  summary.samples = samples;

  auto column = [&](std::size_t c, auto member) {
    std::vector<double> v(cfg.paths);
    for (std::size_t p = 0; p < cfg.paths; ++p) v[p] = samples[p * per_path + c].*member;
    return v;
  };

  auto time_factor = [&](double t, double s) {
    if (cfg.regime == Regime::critical) return 1.0;
    return subcritical_time_factor(cfg.alpha, t, s, cfg.model);
  };

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const auto& pr = cfg.kappas[cell.pair];
    CellSummary cs;
    cs.pair = pr;
    cs.pair_index = cell.pair;
    cs.n = cell.n;
    cs.t = cell.t;
    cs.samples = cfg.paths;
    cs.normalization = detail::normalization(cfg, cell.n);
    const Moments ex = moments(column(c, &Sample::excess));
    cs.mean_excess = ex.mean;
    cs.mean_excess_se = ex.mean_se();
    cs.drift = drift[c];
    cs.mean_fluctuation = ex.mean - drift[c];
    const auto normalized = column(c, &Sample::normalized);
    const Moments nm = moments(normalized);
    cs.variance = nm.variance;
    cs.variance_se = nm.variance_se();
    cs.predicted_variance = pair_covariance(cc, pr, pr) * time_factor(cell.t, cell.t);
    const auto gap = column(c, &Sample::theta_gap);
    cs.theta_gap_variance = moments(gap).variance / (cs.normalization * cs.normalization);
    if (cfg.paths >= 30) {
      // the limit law is centred; compare the sample about its own mean
      std::vector<double> centred = normalized;
      for (double& x : centred) x -= nm.mean;
      cs.normality = normality_stats(centred, cs.predicted_variance);
    }
    summary.cells.push_back(cs);
  }

  for (std::size_t a = 0; a < cells.size(); ++a) {
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      const bool same_box = cells[a].n == cells[b].n;
      const bool same_time = cells[a].t == cells[b].t;
      const bool same_pair = cells[a].pair == cells[b].pair;
      if (!same_box) continue;
      const auto xa = column(a, &Sample::normalized);
      const auto xb = column(b, &Sample::normalized);
      CovarianceCheck chk;
      chk.cell_a = a;
      chk.cell_b = b;
      chk.sample = covariance(xa, xb);
      chk.se = covariance_se(xa, xb);
      const auto& pa = cfg.kappas[cells[a].pair];
      const auto& pb = cfg.kappas[cells[b].pair];
      chk.predicted = pair_covariance(cc, pa, pb) * time_factor(cells[a].t, cells[b].t);
      if (same_time && !same_pair) summary.pair_covariances.push_back(chk);
      if (same_pair && !same_time) summary.time_covariances.push_back(chk);
    }
  }

  auto variance_of = [&](std::size_t pair, double n, double t) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].pair == pair && cells[c].n == n && cells[c].t == t) {
        return moments(column(c, &Sample::fluctuation)).variance;
      }
    }
    return 0.0;
  };

  if (cfg.n_list.size() >= 3) {
    for (std::size_t p = 0; p < cfg.kappas.size(); ++p) {
      const auto& pr = cfg.kappas[p];
      if (cfg.regime == Regime::critical) {
        LogGrowthCheck lg;
        lg.pair_index = p;
        lg.n_values = cfg.n_list;
        for (double n : cfg.n_list) {
          const double v = variance_of(p, n, 1.0);
          lg.variances.push_back(v);
          lg.variance_per_log.push_back(v / std::log(n));
        }
        if (std::all_of(lg.variances.begin(), lg.variances.end(), [](double v) { return v > 0.0; })) {
          lg.fit = log_growth_regression(lg.n_values, lg.variances);
        }
        lg.predicted_per_log = pair_covariance(cc, pr, pr);
        summary.log_growth.push_back(lg);
      } else {
        for (double t : t_grid) {
          ScalingCheck sc;
          sc.pair_index = p;
          sc.t = t;
          sc.n_values = cfg.n_list;
          for (double n : cfg.n_list) sc.variances.push_back(variance_of(p, n, t));
          if (std::all_of(sc.variances.begin(), sc.variances.end(), [](double v) { return v > 0.0; })) {
            sc.fit = scaling_regression(sc.n_values, sc.variances);
          }
          sc.expected_exponent = 1.0 - 2.0 * cfg.alpha;
          summary.scaling.push_back(sc);
        }
      }
    }
  }
  return summary;
}

inline FluctuationSummary run_subcritical(const ExperimentConfig& cfg) {
  if (cfg.regime != Regime::subcritical) throw ConfigError("regime: run_subcritical needs regime 'subcritical'");
  return run_fluctuations(cfg);
}

inline FluctuationSummary run_critical(const ExperimentConfig& cfg) {
  if (cfg.regime != Regime::critical) throw ConfigError("regime: run_critical needs regime 'critical'");
  if (cfg.model != Model::decaying_potential) throw ConfigError("model: run_critical covers the decaying potential");
  return run_fluctuations(cfg);
}

// ---------------------------------------------------------------------------
// Subsequence pipelines (supercritical, DC critical).

inline JointSubsequence subsequence_for(const ExperimentConfig& cfg) {
  const auto& s = cfg.subsequence.value();
  const auto& pr = cfg.kappas.front();
  return build_joint_subsequence(pr.kappa1, s.gamma1, pr.kappa2, s.gamma2, s.count, s.n_max);
}

namespace detail {

inline long long discrepancy(const KappaPair& pr, double n, double tt1, double tt2) {
  const long long count = floor_pi(pr.kappa2 * n + tt2) - floor_pi(pr.kappa1 * n + tt1);
  return count - (floor_pi(pr.kappa2 * n) - floor_pi(pr.kappa1 * n));
}

inline void check_subsequence(const ExperimentConfig& cfg, const SubsequenceSpec& s1, const SubsequenceSpec& s2) {
  const auto& pr = cfg.kappas.front();
  if (s1.kappa != pr.kappa1 || s2.kappa != pr.kappa2) {
    throw ConfigError("subsequence: kappas do not match the configured pair");
  }
  if (s1.members != s2.members) throw ConfigError("subsequence: the two members lists must coincide");
  if (s1.members.size() < 3) throw ConfigError("subsequence: fewer than three members available");
}

inline void tabulate_law(SubsequenceReport& rep) {
  const std::size_t m = rep.evaluated_members.size();
  for (const auto& r : rep.records) {
    for (std::size_t i = 0; i < m; ++i) {
      auto& freq = rep.discrepancy_law[r.discrepancy[i]];
      freq.resize(m, 0.0);
      freq[i] += 1.0 / static_cast<double>(rep.records.size());
    }
  }
}

}  // namespace detail

/// Decaying potential with alpha > 1/2: theta_tilde converges, and along the
/// subsequence the count correction is the integer predicted from the limit.
inline FluctuationSummary run_supercritical(const ExperimentConfig& raw, const SubsequenceSpec& s1,
                                            const SubsequenceSpec& s2) {
  const ExperimentConfig cfg = validated(raw);
  if (cfg.regime != Regime::supercritical) throw ConfigError("regime: run_supercritical needs alpha > 1/2");
  detail::check_subsequence(cfg, s1, s2);
  const auto& pr = cfg.kappas.front();
  const auto& members = s1.members;
  const std::size_t K = members.size();

  SubsequenceReport rep;
  rep.subsequence = {s1, s2};
  for (std::size_t i = 0; i < K; ++i) rep.evaluated_members.push_back(i);
  rep.records.resize(cfg.paths);
  const double n_K = static_cast<double>(members.back());
  const EnvelopeProfile envelope = detail::envelope_for(cfg, n_K);
  if (cfg.model == Model::decaying_potential) {
    // int_{n/2}^inf (1+s^2)^{-alpha} ~ (n/2)^{1-2 alpha} / (2 alpha - 1)
    rep.tail_scale = std::sqrt(std::pow(0.5 * n_K, 1.0 - 2.0 * cfg.alpha) / (2.0 * cfg.alpha - 1.0));
  }

  std::vector<double> checkpoints;
  for (auto n : members) checkpoints.push_back(static_cast<double>(n));
  const std::vector<double> kappas{pr.kappa1, pr.kappa2};

  parallel_for(cfg.paths, resolve_workers(cfg.workers), [&](std::size_t path) {
    SubsequencePathRecord rec;
    rec.path = path;
    if (cfg.model == Model::decaying_potential) {
      const Potential potential{cfg.F, envelope};
      const auto tt = simulate_checkpoints(potential, kappas, checkpoints, cfg.dt, cfg.substeps, {cfg.seed, path});
      for (std::size_t i = 0; i < K; ++i) {
        rec.theta_tilde1.push_back(tt[i][0]);
        rec.theta_tilde2.push_back(tt[i][1]);
        rec.discrepancy.push_back(detail::discrepancy(pr, checkpoints[i], tt[i][0], tt[i][1]));
      }
    } else {
      // the DC potential depends on the box: one run per evaluated member
      for (std::size_t i = 0; i < K; ++i) {
        if (i + 3 < K) {
          rec.theta_tilde1.push_back(0.0);
          rec.theta_tilde2.push_back(0.0);
          rec.discrepancy.push_back(0);
          continue;
        }
        const Potential potential{cfg.F, DcCoupling{cfg.alpha, checkpoints[i]}};
        const auto tt = simulate_checkpoints(potential, kappas, {checkpoints[i]}, cfg.dt, cfg.substeps, {cfg.seed, path});
        rec.theta_tilde1.push_back(tt[0][0]);
        rec.theta_tilde2.push_back(tt[0][1]);
        rec.discrepancy.push_back(detail::discrepancy(pr, checkpoints[i], tt[0][0], tt[0][1]));
      }
    }
    const double inf1 = rec.theta_tilde1.back();
    const double inf2 = rec.theta_tilde2.back();
    if (cfg.model == Model::decaying_potential) {
      for (std::size_t i = K / 2; i < K; ++i) {
        rec.tail_oscillation = std::max({rec.tail_oscillation, std::abs(rec.theta_tilde1[i] - inf1),
                                         std::abs(rec.theta_tilde2[i] - inf2)});
      }
    }
    rec.predicted = floor_pi(s2.gamma_target + inf2) - floor_pi(s1.gamma_target + inf1);
    const long long expected = cfg.model == Model::dc ? 0 : rec.predicted;
    rec.identity_holds = true;
    for (std::size_t i = K - 3; i < K; ++i) rec.identity_holds = rec.identity_holds && rec.discrepancy[i] == expected;
    rep.records[path] = std::move(rec);
  });

  if (cfg.model == Model::dc) {
    rep.evaluated_members = {K - 3, K - 2, K - 1};
    for (auto& r : rep.records) {
      r.discrepancy.erase(r.discrepancy.begin(), r.discrepancy.end() - 3);
      r.theta_tilde1.erase(r.theta_tilde1.begin(), r.theta_tilde1.end() - 3);
      r.theta_tilde2.erase(r.theta_tilde2.begin(), r.theta_tilde2.end() - 3);
    }
  }
  std::size_t tail_ok = 0;
  std::size_t identity_ok = 0;
  for (const auto& r : rep.records) {
    if (r.tail_oscillation < rep.tail_threshold) ++tail_ok;
    if (r.identity_holds) ++identity_ok;
  }
  const double paths = static_cast<double>(cfg.paths);
  rep.fraction_tail_below = static_cast<double>(tail_ok) / paths;
  if (cfg.model == Model::dc) {
    rep.fraction_zero = static_cast<double>(identity_ok) / paths;
  } else {
    rep.fraction_identity = static_cast<double>(identity_ok) / paths;
  }
  detail::tabulate_law(rep);

  FluctuationSummary summary;
  summary.config = cfg;
  summary.subsequence = std::move(rep);
  return summary;
}

/// DC model at alpha = 1/2: the count correction along the subsequence has a
/// nondegenerate limit law; compare its empirical law at members k and 2k.
inline FluctuationSummary run_dc_critical(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = validated(raw);
  const auto js = subsequence_for(cfg);
  const auto& pr = cfg.kappas.front();
  const auto& members = js.first.members;
  const std::size_t K = members.size();
  if (K < 2) throw ConfigError("subsequence: fewer than two members available");
  SubsequenceReport rep;
  rep.subsequence = js;
  rep.evaluated_members = {K / 2 - 1, K - 1};  // members k and 2k (1-based k = K/2)
  rep.records.resize(cfg.paths);
  const std::vector<double> kappas{pr.kappa1, pr.kappa2};

  parallel_for(cfg.paths, resolve_workers(cfg.workers), [&](std::size_t path) {
    SubsequencePathRecord rec;
    rec.path = path;
    for (std::size_t m : rep.evaluated_members) {
      const double n = static_cast<double>(members[m]);
      const Potential potential{cfg.F, DcCoupling{cfg.alpha, n}};
      const auto tt = simulate_checkpoints(potential, kappas, {n}, cfg.dt, cfg.substeps, {cfg.seed, path});
      rec.theta_tilde1.push_back(tt[0][0]);
      rec.theta_tilde2.push_back(tt[0][1]);
      rec.discrepancy.push_back(detail::discrepancy(pr, n, tt[0][0], tt[0][1]));
    }
    rec.predicted = floor_pi(js.second.gamma_target + rec.theta_tilde2.back()) -
                    floor_pi(js.first.gamma_target + rec.theta_tilde1.back());
    rec.identity_holds = rec.discrepancy.back() == rec.predicted;
    rep.records[path] = std::move(rec);
  });

  std::vector<long long> first;
  std::vector<long long> second;
  std::size_t identity_ok = 0;
  for (const auto& r : rep.records) {
    first.push_back(r.discrepancy[0]);
    second.push_back(r.discrepancy[1]);
    if (r.identity_holds) ++identity_ok;
  }
  rep.total_variation = total_variation(first, second);
  rep.fraction_identity = static_cast<double>(identity_ok) / static_cast<double>(cfg.paths);
  detail::tabulate_law(rep);

  FluctuationSummary summary;
  summary.config = cfg;
  summary.subsequence = std::move(rep);
  return summary;
}

inline FluctuationSummary run_dc(const ExperimentConfig& cfg) {
  if (cfg.model != Model::dc) throw ConfigError("model: run_dc needs model 'dc'");
  switch (validated(cfg).regime) {
    case Regime::subcritical: return run_fluctuations(cfg);
    case Regime::critical: return run_dc_critical(cfg);
    case Regime::supercritical: {
      const auto js = subsequence_for(validated(cfg));
      return run_supercritical(cfg, js.first, js.second);
    }
  }
  throw ConfigError("regime: unknown");
}

/// Dispatches on (model, regime).
inline FluctuationSummary run_experiment(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = validated(raw);
  if (cfg.model == Model::dc) return run_dc(cfg);
  switch (cfg.regime) {
    case Regime::subcritical: return run_subcritical(cfg);
    case Regime::critical: return run_critical(cfg);
    case Regime::supercritical: {
      const auto js = subsequence_for(cfg);
      return run_supercritical(cfg, js.first, js.second);
    }
  }
  throw ConfigError("regime: unknown");
}

}  // namespace dosfluct
