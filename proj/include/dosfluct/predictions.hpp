#pragma once

// Analytic drift and covariance predictions for the counting function
// N_{nt}(kappa1, kappa2) - nt (kappa2 - kappa1) / pi.
//
// Centering: sum_j Re(C_j(k2)/(2 pi k2) - C_j(k1)/(2 pi k1)) int_0^{nt} a^{j+1}.
// Fluctuation: G(k2)/(2 pi k2) - G(k1)/(2 pi k1) - (1/(2 pi k2) - 1/(2 pi k1)) G, with
// Var G(k) = 1/2 <[g_k, conj g_k]> tau and Var G = <[g, g]> tau, independent
// across distinct kappas. The time factor tau depends on the regime.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "dosfluct/constants.hpp"
#include "dosfluct/envelope.hpp"
#include "dosfluct/errors.hpp"
#include "dosfluct/torus_function.hpp"

namespace dosfluct {

enum class Model { decaying_potential, dc };

struct KappaPair {
  double kappa1 = 0.0;
  double kappa2 = 0.0;

  friend bool operator==(const KappaPair&, const KappaPair&) = default;
};

/// Drift of N - leading term given precomputed constant tables for kappa1 and kappa2.
inline double drift_from_tables(const ConstantsTable& c1, const ConstantsTable& c2, const EnvelopeProfile& envelope,
                                double T) {
  const double w1 = 1.0 / (2.0 * std::numbers::pi * c1.kappa);
  const double w2 = 1.0 / (2.0 * std::numbers::pi * c2.kappa);
  const std::size_t D = std::min(c1.values.size(), c2.values.size());
  double drift = 0.0;
  for (std::size_t j = 1; j <= D; ++j) {
    const double coeff = (c2.values[j - 1] * w2 - c1.values[j - 1] * w1).real();
    if (coeff != 0.0) drift += coeff * envelope.power_integral(static_cast<int>(j) + 1, T);
  }
  return drift;
}

inline double drift_prediction(const TorusFunction& F, double kappa1, double kappa2, const EnvelopeProfile& envelope,
                               double n, double t, int D) {
  if (!(kappa1 > 0.0) || !(kappa2 >= kappa1)) throw DomainError("drift_prediction: requires 0 < kappa1 <= kappa2");
  if (!(n > 0.0) || !(t > 0.0)) throw DomainError("drift_prediction: n and t must be positive");
  if (F.is_zero()) return 0.0;
  return drift_from_tables(compute_Ck(F, kappa1, D), compute_Ck(F, kappa2, D), envelope, n * t);
}

/// Weights of the limit Gaussian combination on G(kappa) and on G.
struct GaussianWeights {
  std::map<double, double> per_kappa;
  double shared = 0.0;
};

inline GaussianWeights gaussian_weights(const KappaPair& p) {
  const double w1 = 1.0 / (2.0 * std::numbers::pi * p.kappa1);
  const double w2 = 1.0 / (2.0 * std::numbers::pi * p.kappa2);
  GaussianWeights w;
  w.per_kappa[p.kappa2] += w2;
  w.per_kappa[p.kappa1] -= w1;
  w.shared = -(w2 - w1);
  return w;
}

/// Covariance of the limits for two kappa pairs, per unit of the time factor.
inline double pair_covariance(const CovarianceConstants& cc, const KappaPair& a, const KappaPair& b) {
  const GaussianWeights wa = gaussian_weights(a);
  const GaussianWeights wb = gaussian_weights(b);
  double cov = wa.shared * wb.shared * cc.sigma2_zero;
  for (const auto& [k, w] : wa.per_kappa) {
    auto it = wb.per_kappa.find(k);
    if (it != wb.per_kappa.end() && w != 0.0 && it->second != 0.0) cov += w * it->second * 0.5 * cc.at(k);
  }
  return cov;
}

inline void check_subcritical(double alpha, double t) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("variance_prediction: alpha must lie in (0, 1/2)");
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("variance_prediction: t must lie in (0, 1]");
}

/// Time factor tau(t, s) for the subcritical limits.
/// Decaying potential: (t ^ s)^{1-2 alpha} / (1 - 2 alpha), from int_0^{nt} a^2 ~ (nt)^{1-2alpha}/(1-2alpha).
/// DC model: int_0^{nt} (n^{-alpha})^2 ds = n^{1-2alpha} t, hence t ^ s.
inline double subcritical_time_factor(double alpha, double t, double s, Model model) {
  check_subcritical(alpha, t);
  check_subcritical(alpha, s);
  const double m = std::min(t, s);
  return model == Model::decaying_potential ? std::pow(m, 1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha) : m;
}

inline double variance_prediction(const TorusFunction& F, double kappa1, double kappa2, double alpha, double t,
                                  Model model) {
  check_subcritical(alpha, t);
  if (!(kappa1 > 0.0) || !(kappa2 >= kappa1)) throw DomainError("variance_prediction: requires 0 < kappa1 <= kappa2");
  if (F.is_zero() || kappa1 == kappa2) return 0.0;
  const auto cc = covariance_constants(F, {kappa1, kappa2});
  const KappaPair p{kappa1, kappa2};
  return pair_covariance(cc, p, p) * subcritical_time_factor(alpha, t, t, model);
}

/// Variance per unit log n in the critical regime.
inline double critical_variance_prediction(const TorusFunction& F, double kappa1, double kappa2) {
  if (!(kappa1 > 0.0) || !(kappa2 >= kappa1)) {
    throw DomainError("critical_variance_prediction: requires 0 < kappa1 <= kappa2");
  }
  if (F.is_zero() || kappa1 == kappa2) return 0.0;
  const auto cc = covariance_constants(F, {kappa1, kappa2});
  const KappaPair p{kappa1, kappa2};
  return pair_covariance(cc, p, p);
}

/// D = min{d >= 1 : 1/(2 alpha) < d + 1}
inline int default_order(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("default_order: alpha must be positive");
  int d = 1;
  while (!(1.0 / (2.0 * alpha) < d + 1.0)) ++d;
  return d;
}

}  // namespace dosfluct
