#pragma once

// Deterministic drift constants C_k(kappa) and Gaussian covariance constants.
//
// The drift constants come from iterating the integration-by-parts expansion
// of K_{m,beta}(H) = int a^m e^{i beta theta} H(X) ds. Each step moves the
// phase index beta by +2, -2 or 0 and applies T^+, T^- or T^0; a path that
// first reaches beta = 0 after k steps contributes <...> int a^{k+1}. Those
// paths are Motzkin paths, enumerated by enumerate_Sk.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dosfluct/errors.hpp"
#include "dosfluct/torus_function.hpp"

namespace dosfluct {

enum class TKind { plus, minus, zero };

inline TKind kind_from_step(int epsilon) {
  switch (epsilon) {
    case 1: return TKind::plus;
    case -1: return TKind::minus;
    case 0: return TKind::zero;
    default: throw DomainError("Motzkin step must be -1, 0 or +1, got " + std::to_string(epsilon));
  }
}

/// T^{kind}_{beta,kappa} h. T^+ and T^- share one formula, -(i beta / 2 kappa) (1/2) F R_{beta kappa} h;
/// T^0 is +(i beta / 2 kappa) F R_{beta kappa} h. R_s = (L + i s)^{-1}.
inline TorusFunction apply_T(const TorusFunction& F, const TorusFunction& h, int beta, double kappa, TKind kind,
                             GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  if (beta < 2 || beta % 2 != 0) throw DomainError("apply_T: beta must be even and >= 2, got " + std::to_string(beta));
  if (!(kappa > 0.0)) throw DomainError("apply_T: kappa must be positive");
  const cplx prefactor = cplx(0.0, static_cast<double>(beta) / (2.0 * kappa)) * (kind == TKind::zero ? 1.0 : -0.5);
  return multiply(F, resolvent_shifted(h, kappa, beta, conv)) * prefactor;
}

struct MotzkinIndex {
  std::vector<int> epsilons;
  std::vector<int> betas;

  friend bool operator==(const MotzkinIndex&, const MotzkinIndex&) = default;
};

namespace detail {

inline void extend_motzkin(std::size_t length, std::vector<int>& eps, int height, std::vector<MotzkinIndex>& out) {
  const std::size_t remaining = length - eps.size();
  if (remaining == 0) {
    if (height != 0) return;
    MotzkinIndex idx;
    idx.epsilons = eps;
    idx.betas.reserve(eps.size());
    int beta = 2;
    for (int e : eps) {
      idx.betas.push_back(beta);
      beta += 2 * e;
    }
    out.push_back(std::move(idx));
    return;
  }
  // must be able to come back down to zero
  if (static_cast<std::size_t>(height) > remaining) return;
  for (int step : {1, -1, 0}) {
    if (height + step < 0) continue;
    eps.push_back(step);
    extend_motzkin(length, eps, height + step, out);
    eps.pop_back();
  }
}

}  // namespace detail

/// All index sequences of length k-1 with steps in {-1,0,+1}, nonnegative
/// prefix sums and zero total; betas[0] = 2, betas[i+1] = betas[i] + 2 eps[i].
inline std::vector<MotzkinIndex> enumerate_Sk(int k) {
  if (k < 1) throw DomainError("enumerate_Sk: k must be >= 1, got " + std::to_string(k));
  std::vector<MotzkinIndex> out;
  std::vector<int> eps;
  detail::extend_motzkin(static_cast<std::size_t>(k - 1), eps, 0, out);
  return out;
}

struct ConstantsTable {
  double kappa = 0.0;
  int order = 0;
  std::vector<cplx> values;  // C_1 .. C_D
};

inline void require_mean_zero(const TorusFunction& F, const char* who) {
  if (std::abs(mean(F)) > 1e-14) throw DomainError(std::string(who) + ": F must have zero mean");
}

/// <T^-_2 T^{eps_{k-1}}_{beta_{k-1}} ... T^{eps_1}_{beta_1} F>, innermost operator applied first.
inline cplx motzkin_term(const TorusFunction& F, const MotzkinIndex& idx, double kappa,
                         GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  TorusFunction h = F;
  for (std::size_t i = 0; i < idx.epsilons.size(); ++i) {
    h = apply_T(F, h, idx.betas[i], kappa, kind_from_step(idx.epsilons[i]), conv);
  }
  return mean(apply_T(F, h, 2, kappa, TKind::minus, conv));
}

inline ConstantsTable compute_Ck(const TorusFunction& F, double kappa, int D,
                                 GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  require_mean_zero(F, "compute_Ck");
  if (!(kappa > 0.0)) throw DomainError("compute_Ck: kappa must be positive");
  if (D < 1) throw DomainError("compute_Ck: D must be >= 1");
  ConstantsTable table;
  table.kappa = kappa;
  table.order = D;
  for (int k = 1; k <= D; ++k) {
    cplx sum{};
    for (const auto& idx : enumerate_Sk(k)) sum += motzkin_term(F, idx, kappa, conv);
    table.values.push_back(sum);
  }
  return table;
}

/// g_kappa = (L + 2 i kappa)^{-1} F
inline TorusFunction corrector(const TorusFunction& F, double kappa,
                               GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  return resolvent_shifted(F, kappa, 2, conv);
}

/// <[g_kappa, conj(g_kappa)]>, real and nonnegative.
inline double sigma2_kappa(const TorusFunction& F, double kappa,
                           GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  const TorusFunction g = corrector(F, kappa, conv);
  const cplx v = mean(carre_du_champ(g, g.conj()));
  if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v))) {
    throw ConsistencyError("<[g_kappa, conj g_kappa]> has imaginary residue " + std::to_string(v.imag()));
  }
  return v.real();
}

/// <[g, g]> with g = L^{-1}(F - <F>).
inline double sigma2_zero(const TorusFunction& F, GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  const TorusFunction g = resolvent_zero(F, conv);
  const cplx v = mean(carre_du_champ(g, g));
  if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v))) {
    throw ConsistencyError("<[g, g]> has imaginary residue " + std::to_string(v.imag()));
  }
  return v.real();
}

struct CovarianceConstants {
  std::vector<std::pair<double, double>> sigma2_of_kappa;  // (kappa, <[g_k, conj g_k]>)
  double sigma2_zero = 0.0;

  double at(double kappa) const {
    for (const auto& [k, v] : sigma2_of_kappa) {
      if (k == kappa) return v;
    }
    throw DomainError("CovarianceConstants: no entry for kappa " + std::to_string(kappa));
  }
};

inline CovarianceConstants covariance_constants(const TorusFunction& F, const std::vector<double>& kappas,
                                                GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  require_mean_zero(F, "covariance_constants");
  CovarianceConstants out;
  for (double k : kappas) {
    if (!(k > 0.0)) throw DomainError("covariance_constants: kappa must be positive");
    out.sigma2_of_kappa.emplace_back(k, sigma2_kappa(F, k, conv));
  }
  out.sigma2_zero = sigma2_zero(F, conv);
  return out;
}

}  // namespace dosfluct
