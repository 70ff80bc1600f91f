// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number, e.g. `acceptance 1 2 3`.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dosfluct/config.hpp"
#include "dosfluct/constants.hpp"
#include "dosfluct/experiments.hpp"
#include "dosfluct/path.hpp"
#include "dosfluct/predictions.hpp"
#include "dosfluct/pruefer.hpp"

using namespace dosfluct;

namespace {

constexpr std::uint64_t kSeed = 20261015;
constexpr double kDt = 1e-2;
constexpr double kCriticalDt = 2e-2;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double cos_c1(double k) { return -2.0 / (16.0 * k * k + 1.0); }

// Two independent uniform fractional parts in the integer count add 1/6 to its
// variance; relative to the prediction after normalization.
double floor_term(const CellSummary& c) {
  return (1.0 / 6.0) / (c.normalization * c.normalization) / c.predicted_variance;
}

// ---------------------------------------------------------------------------

Verdict resolvent_identity() {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> degree(0, 8);
  std::uniform_int_distribution<int> half_beta(1, 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(0.05, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    TorusFunction::Coeffs c;
    const int d = degree(rng);
    for (int k = -d; k <= d; ++k) c[k] = cplx(u(rng), u(rng));
    const TorusFunction h(c, false);
    const double kappa = shift(rng);
    const int beta = 2 * half_beta(rng);
    const TorusFunction r = resolvent_shifted(h, kappa, beta);
    // (L + i beta kappa) r, evaluated mode by mode
    double residual = 0.0;
    for (const auto& [k, hk] : h.coeffs()) {
      const cplx lhs = (generator_eigenvalue(k) + cplx(0.0, beta * kappa)) * r.coeff(k);
      residual = std::max(residual, std::abs(lhs - hk));
    }
    worst = std::max(worst, residual);
  }
  return {worst < 1e-12, fmt("max residual %.3e over 100 polynomials (tol 1e-12)", worst)};
}

// Independent Fourier-space operator: r = h / (lambda + i beta kappa), then F r, then prefactor.
using Series = std::map<int, cplx>;

Series hand_T(const Series& F, const Series& h, int beta, double kappa, char kind) {
  Series r;
  for (const auto& [k, c] : h) r[k] = c / cplx(-0.5 * k * k, beta * kappa);
  Series out;
  for (const auto& [a, fa] : F) {
    for (const auto& [b, rb] : r) out[a + b] += fa * rb;
  }
  const cplx pre = cplx(0.0, beta / (2.0 * kappa)) * (kind == '0' ? 1.0 : -0.5);
  for (auto& [k, c] : out) c *= pre;
  return out;
}

cplx hand_mean(const Series& s) {
  const auto it = s.find(0);
  return it == s.end() ? cplx{} : it->second;
}

Verdict constants_check() {
  constexpr std::size_t motzkin[] = {1, 1, 2, 4, 9, 21, 51};
  bool counts = true;
  for (int k = 1; k <= 7; ++k) counts = counts && enumerate_Sk(k).size() == motzkin[k - 1];

  const TorusFunction F = TorusFunction::cosine(1) + TorusFunction::cosine(2, 0.7) + TorusFunction::sine(1, 0.4);
  const Series f(F.coeffs().begin(), F.coeffs().end());
  double worst_c23 = 0.0;
  for (double kappa : {0.6, 1.0, 1.7}) {
    const auto table = compute_Ck(F, kappa, 3);
    const cplx c2 = hand_mean(hand_T(f, hand_T(f, f, 2, kappa, '0'), 2, kappa, '-'));
    const cplx c3 = hand_mean(hand_T(f, hand_T(f, hand_T(f, f, 2, kappa, '+'), 4, kappa, '-'), 2, kappa, '-')) +
                    hand_mean(hand_T(f, hand_T(f, hand_T(f, f, 2, kappa, '0'), 2, kappa, '0'), 2, kappa, '-'));
    worst_c23 = std::max({worst_c23, std::abs(table.values[1] - c2), std::abs(table.values[2] - c3)});
  }
  double worst_c1 = 0.0;
  for (double kappa : {0.3, 0.8, 1.0, 1.3, 2.5}) {
    const cplx c1 = compute_Ck(TorusFunction::cosine(1), kappa, 1).values[0];
    worst_c1 = std::max(worst_c1, std::abs(c1.real() - cos_c1(kappa)));
  }
  return {counts && worst_c23 < 1e-12 && worst_c1 < 1e-12,
          fmt("Motzkin counts %s; C_2/C_3 max error %.3e; Re C_1 max error %.3e (tol 1e-12)",
              counts ? "1,1,2,4,9,21,51" : "WRONG", worst_c23, worst_c1)};
}

Verdict covariance_check() {
  const TorusFunction F = TorusFunction::cosine(1);
  double worst = std::abs(sigma2_zero(F) - 2.0);
  for (double kappa : {0.25, 0.8, 1.0, 1.3, 3.0}) {
    worst = std::max(worst, std::abs(sigma2_kappa(F, kappa) - 2.0 / (1.0 + 16.0 * kappa * kappa)));
  }
  return {worst < 1e-12, fmt("max error %.3e against 2/(1+16k^2) and 2 (tol 1e-12)", worst)};
}

Verdict counting_oracles() {
  // free case
  bool free_ok = true;
  const Potential free{TorusFunction::constant(0.0), PowerDecay{0.3}};
  for (double n : {10.0, 57.3, 100.0}) {
    const TorusPath path = sample_path(n, 1e-2, {kSeed, 0});
    for (auto [k1, k2] : {std::pair{0.3, 0.9}, std::pair{0.8, 1.3}, std::pair{1.0, 2.5}}) {
      const auto r = count_interval(integrate_theta(path, free, k1, 1), integrate_theta(path, free, k2, 1), n);
      free_ok = free_ok && r.count == floor_pi(k2 * n) - floor_pi(k1 * n);
    }
  }
  // V = q: Dirichlet eigenvalues q + (pi j / n)^2
  bool constant_ok = true;
  const double q = 0.5;
  const double n = 100.0;
  const Potential flat{TorusFunction::constant(1.0), Constant{q}};
  const TorusPath path = sample_path(n, 1e-2, {kSeed, 1});
  for (auto [k1, k2] : {std::pair{0.8, 1.3}, std::pair{1.0, 2.0}}) {
    long long exact = 0;
    for (int j = 1; j < 100000; ++j) {
      const double E = q + std::pow(kPi * j / n, 2);
      if (E >= k2 * k2) break;
      exact += E > k1 * k1;
    }
    const auto r = count_interval(integrate_theta(path, flat, k1, 1), integrate_theta(path, flat, k2, 1), n);
    constant_ok = constant_ok && r.count == exact;
  }
  // Pruefer vs finite-difference inertia on 20 seeded paths at n = 100
  const Potential pot{TorusFunction::cosine(1), PowerDecay{0.3}};
  const double h = 1e-3;
  long long worst = 0;
  int exact_refined = 0;
  for (std::uint64_t p = 0; p < 20; ++p) {
    const TorusPath sp = sample_path(n, h, {kSeed, p});
    auto pruefer = [&](int substeps) {
      return count_interval(integrate_theta(sp, pot, 0.8, substeps), integrate_theta(sp, pot, 1.3, substeps), n).count;
    };
    worst = std::max(worst, std::abs(pruefer(1) - fd_count_interval(sp, pot, n, h, 0.64, 1.69)));
    exact_refined += pruefer(2) == fd_count_interval(sp, pot, n, h / 2, 0.64, 1.69);
  }
  const bool pass = free_ok && constant_ok && worst <= 1 && exact_refined >= 18;
  return {pass, fmt("free %s; constant potential %s; FD max discrepancy %lld (tol 1); exact after refinement %d/20 "
                    "(need 18)",
                    free_ok ? "exact" : "WRONG", constant_ok ? "exact" : "WRONG", worst, exact_refined)};
}

// ---------------------------------------------------------------------------

ExperimentConfig headline_config() {
  ExperimentConfig cfg;
  cfg.model = Model::decaying_potential;
  cfg.regime = Regime::subcritical;
  cfg.alpha = 0.3;
  cfg.kappas = {{0.8, 1.3}};
  cfg.t_grid = {1.0};
  cfg.n_list = {1000.0, 2000.0, 4000.0};
  cfg.paths = 400;
  cfg.dt = kDt;
  cfg.seed = kSeed;
  return cfg;
}

const FluctuationSummary& headline() {
  static const FluctuationSummary s = run_experiment(headline_config());
  return s;
}

const CellSummary& cell_at(const FluctuationSummary& s, double n) {
  for (const auto& c : s.cells) {
    if (c.n == n && c.t == 1.0) return c;
  }
  throw ConsistencyError("acceptance: missing cell");
}

Verdict subcritical_headline() {
  const CellSummary& c = cell_at(headline(), 4000.0);
  const double z = std::abs(c.mean_excess - c.drift) / c.mean_excess_se;
  const double ratio = c.variance / c.predicted_variance;
  const bool pass = z < 3.0 && std::abs(ratio - 1.0) <= 0.2 && std::abs(c.normality.skewness) < 0.3 &&
                    std::abs(c.normality.excess_kurtosis) < 0.6;
  return {pass, fmt("mean excess %.4f vs drift %.4f (%.2f se, tol 3); variance %.5f vs %.5f (ratio %.3f +- %.3f, "
                    "tol 20%%); skewness %.3f (tol 0.3); excess kurtosis %.3f (tol 0.6); floor-free ratio %.3f; floor term "
                    "+%.3f",
                    c.mean_excess, c.drift, z, c.variance, c.predicted_variance, ratio,
                    c.variance_se / c.predicted_variance, c.normality.skewness, c.normality.excess_kurtosis,
                    c.theta_gap_variance / c.predicted_variance, floor_term(c))};
}

Verdict subcritical_scaling() {
  const auto& sc = headline().scaling.at(0);
  const bool pass = std::abs(sc.fit.exponent - 0.4) <= 0.1;
  return {pass, fmt("exponent %.4f over n = 1000, 2000, 4000 vs 0.4 (tol 0.1), r2 %.4f", sc.fit.exponent, sc.fit.r2)};
}

Verdict critical() {
  ExperimentConfig cfg;
  cfg.regime = Regime::critical;
  cfg.alpha = 0.5;
  cfg.kappas = {{0.8, 1.3}};
  cfg.n_list = {1e3, 1e4, 1e5};
  cfg.paths = 300;
  cfg.dt = kCriticalDt;
  cfg.seed = kSeed;
  const auto s = run_experiment(cfg);
  double worst_z = 0.0;
  for (const auto& c : s.cells) worst_z = std::max(worst_z, std::abs(c.mean_excess - c.drift) / c.mean_excess_se);
  const CellSummary& top = cell_at(s, 1e5);
  const double ratio = top.variance / top.predicted_variance;
  const double slope = s.log_growth.empty() ? std::nan("") : s.log_growth[0].fit.slope;
  const bool pass = std::abs(ratio - 1.0) <= 0.25 && worst_z < 3.0;
  return {pass, fmt("variance/log n at 1e5 %.5f vs %.5f (ratio %.3f +- %.3f, tol 25%%); drift vs arcsinh(n) worst "
                    "%.2f se (tol 3); floor-free ratio %.3f; floor term +%.3f; log-slope %.5f",
                    top.variance, top.predicted_variance, ratio, top.variance_se / top.predicted_variance, worst_z,
                    top.theta_gap_variance / top.predicted_variance, floor_term(top), slope)};
}

ExperimentConfig subsequence_config(Model model, double alpha, std::size_t count, std::int64_t n_max,
                                    std::size_t paths) {
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.alpha = alpha;
  cfg.regime = regime_of(alpha);
  cfg.kappas = {{kPi / 4, 5 * kPi / 12}};
  cfg.paths = paths;
  cfg.dt = kDt;
  cfg.seed = kSeed;
  cfg.subsequence = SubsequenceConfig{kPi / 4, 5 * kPi / 12, count, n_max};
  return cfg;
}

Verdict supercritical() {
  // n = 1 mod 12 keeps kappa n mod pi fixed for both kappas; last member 9997
  const auto s = run_experiment(subsequence_config(Model::decaying_potential, 0.8, 834, 10000, 200));
  const auto& rep = *s.subsequence;
  const bool pass = rep.fraction_tail_below >= 0.95 && rep.fraction_identity >= 0.95;
  return {pass, fmt("n_K = %lld; tail oscillation < %.1f for %.1f%% of paths (need 95%%); identity at the last three "
                    "members for %.1f%% (need 95%%)",
                    static_cast<long long>(rep.subsequence.first.members.back()), rep.tail_threshold,
                    100.0 * rep.fraction_tail_below, 100.0 * rep.fraction_identity)};
}

Verdict dc_model() {
  const auto zero = run_experiment(subsequence_config(Model::dc, 0.8, 834, 10000, 200));

  ExperimentConfig var = headline_config();
  var.model = Model::dc;
  var.n_list = {4000.0};
  const auto v = run_experiment(var);
  const CellSummary& c = cell_at(v, 4000.0);
  const double ratio = c.variance / c.predicted_variance;

  // members k and 2k at n = 1993 and 3997
  const auto crit = run_experiment(subsequence_config(Model::dc, 0.5, 334, 4000, 400));
  const auto& rc = *crit.subsequence;
  const auto& members = rc.subsequence.first.members;

  const bool pass =
      zero.subsequence->fraction_zero >= 0.95 && std::abs(ratio - 1.0) <= 0.2 && rc.total_variation < 0.1;
  return {pass, fmt("zero discrepancy for %.1f%% of paths at n_K = %lld (need 95%%); variance %.5f vs %.5f (ratio "
                    "%.3f +- %.3f, tol 20%%; floor-free %.3f, floor term +%.3f); TV between n = %lld and %lld: %.4f (tol 0.1)",
                    100.0 * zero.subsequence->fraction_zero,
                    static_cast<long long>(zero.subsequence->subsequence.first.members.back()), c.variance,
                    c.predicted_variance, ratio, c.variance_se / c.predicted_variance,
                    c.theta_gap_variance / c.predicted_variance, floor_term(c), static_cast<long long>(members[rc.evaluated_members[0]]),
                    static_cast<long long>(members[rc.evaluated_members[1]]), rc.total_variation)};
}

std::string outputs_of(ExperimentConfig cfg, unsigned workers) {
  cfg.workers = workers;
  const auto s = run_experiment(cfg);
  const std::string hash = config_hash(cfg);
  std::ostringstream out;
  out << summary_to_json(s, hash).dump(2);
  if (s.subsequence) {
    write_subsequence_csv(out, s, hash);
  } else {
    write_samples_csv(out, s, hash);
    write_plot_csv(out, s, hash);
  }
  return out.str();
}

Verdict determinism() {
  ExperimentConfig sub = headline_config();
  sub.n_list = {100.0, 200.0, 400.0};
  sub.t_grid = {0.5, 1.0};
  sub.kappas = {{0.8, 1.3}, {0.9, 1.5}};
  sub.paths = 64;
  const ExperimentConfig sup = subsequence_config(Model::decaying_potential, 0.8, 20, 1000, 32);
  const ExperimentConfig dc = subsequence_config(Model::dc, 0.5, 8, 1000, 32);
  int identical = 0;
  int total = 0;
  for (const auto& cfg : {sub, sup, dc}) {
    const std::string reference = outputs_of(cfg, 1);
    for (unsigned w : {2u, 3u, 8u}) {
      identical += outputs_of(cfg, w) == reference;
      ++total;
    }
  }
  return {identical == total, fmt("%d/%d re-runs with 2, 3 and 8 workers byte-identical to 1 worker", identical, total)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"resolvent identity", resolvent_identity},
      {"symbolic constants", constants_check},
      {"covariance constants", covariance_check},
      {"counting oracles", counting_oracles},
      {"subcritical headline", subcritical_headline},
      {"subcritical scaling", subcritical_scaling},
      {"critical regime", critical},
      {"supercritical regime", supercritical},
      {"dc model", dc_model},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
