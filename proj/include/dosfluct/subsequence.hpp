#pragma once

// Box lengths n_k along which kappa n_k mod pi approaches a target residue.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dosfluct/errors.hpp"
#include "dosfluct/pruefer.hpp"

namespace dosfluct {

struct Rational {
  std::int64_t p = 0;
  std::int64_t q = 1;
};

/// p/q with q <= max_q and |x - p/q| <= tol, via continued fractions.
inline std::optional<Rational> detect_rational(double x, double tol = 1e-12, std::int64_t max_q = 100000) {
  if (!(x >= 0.0) || !std::isfinite(x)) return std::nullopt;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    if (a > 1e12) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t p2 = ai * p1 + p0;
    const std::int64_t q2 = ai * q1 + q0;
    if (q2 > max_q) break;
    if (std::abs(x - static_cast<double>(p2) / static_cast<double>(q2)) <= tol * std::max(1.0, x)) {
      return Rational{p2, q2};
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double f = r - a;
    if (f <= 0.0) break;
    r = 1.0 / f;
  }
  return std::nullopt;
}

/// {x}_pi = x - floor(x / pi) pi
inline double residue_pi(double kappa, std::int64_t n, const std::optional<Rational>& rat) {
  if (rat) {
    const std::int64_t r = (rat->p % rat->q) * (n % rat->q) % rat->q;
    return kPi * static_cast<double>(r) / static_cast<double>(rat->q);
  }
  return frac_pi(kappa * static_cast<double>(n));
}

struct SubsequenceSpec {
  double kappa = 0.0;
  double gamma_target = 0.0;
  std::vector<std::int64_t> members;
  std::vector<double> achieved;
  double tolerance = 0.0;  // max |achieved - gamma_target|
  std::size_t shortfall = 0;
  bool rational = false;
};

struct JointSubsequence {
  SubsequenceSpec first;
  SubsequenceSpec second;
};

namespace detail {

inline void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < kPi)) throw DomainError("subsequence: gamma must lie in [0, pi)");
}

inline void finalize(SubsequenceSpec& s, std::size_t count, const std::optional<Rational>& rat) {
  s.rational = rat.has_value();
  s.achieved.clear();
  s.tolerance = 0.0;
  for (auto n : s.members) {
    const double r = residue_pi(s.kappa, n, rat);
    s.achieved.push_back(r);
    s.tolerance = std::max(s.tolerance, std::abs(r - s.gamma_target));
  }
  s.shortfall = count > s.members.size() ? count - s.members.size() : 0;
}

// Indices n in [1, n_max] minimizing `error`, the `count` best kept in increasing order.
template <class Error>
std::vector<std::int64_t> best_scan(std::int64_t n_max, std::size_t count, double max_error, Error&& error) {
  std::vector<std::pair<double, std::int64_t>> scored;
  scored.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n_max, 0)));
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double e = error(n);
    if (e <= max_error) scored.emplace_back(e, n);
  }
  const std::size_t keep = std::min(count, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// If kappa/pi = p/q the members form the progression n = r, r + q, ... whose
/// residue is the achievable value nearest gamma; otherwise n <= n_max is
/// scanned for the `count` best residues.
inline SubsequenceSpec build_subsequence(double kappa, double gamma, std::size_t count, std::int64_t n_max,
                                         double max_error = std::numeric_limits<double>::infinity()) {
  detail::check_gamma(gamma);
  if (!(kappa > 0.0)) throw DomainError("build_subsequence: kappa must be positive");
  if (count < 1) throw DomainError("build_subsequence: count must be >= 1");
  SubsequenceSpec s;
  s.kappa = kappa;
  s.gamma_target = gamma;
  const auto rat = detect_rational(kappa / kPi);
  if (rat) {
    std::int64_t best_n = 1;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= rat->q; ++n) {
      const double e = std::abs(residue_pi(kappa, n, rat) - gamma);
      if (e < best_err) {
        best_err = e;
        best_n = n;
      }
    }
    if (best_err <= max_error) {
      for (std::int64_t n = best_n; n <= n_max && s.members.size() < count; n += rat->q) s.members.push_back(n);
    }
  } else {
    s.members = detail::best_scan(n_max, count, max_error,
                                  [&](std::int64_t n) { return std::abs(residue_pi(kappa, n, rat) - gamma); });
  }
  detail::finalize(s, count, rat);
  return s;
}

/// Shared members for two (kappa, gamma) targets, minimizing the larger residue error.
inline JointSubsequence build_joint_subsequence(double kappa1, double gamma1, double kappa2, double gamma2,
                                                std::size_t count, std::int64_t n_max,
                                                double max_error = std::numeric_limits<double>::infinity()) {
  detail::check_gamma(gamma1);
  detail::check_gamma(gamma2);
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0)) throw DomainError("build_joint_subsequence: kappas must be positive");
  if (count < 1) throw DomainError("build_joint_subsequence: count must be >= 1");
  const auto r1 = detect_rational(kappa1 / kPi);
  const auto r2 = detect_rational(kappa2 / kPi);
  auto error = [&](std::int64_t n) {
    return std::max(std::abs(residue_pi(kappa1, n, r1) - gamma1), std::abs(residue_pi(kappa2, n, r2) - gamma2));
  };
  JointSubsequence js;
  js.first.kappa = kappa1;
  js.first.gamma_target = gamma1;
  js.second.kappa = kappa2;
  js.second.gamma_target = gamma2;
  std::vector<std::int64_t> members;
  if (r1 && r2) {
    const std::int64_t period = std::lcm(r1->q, r2->q);
    std::int64_t best_n = 1;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= period; ++n) {
      const double e = error(n);
      if (e < best_err) {
        best_err = e;
        best_n = n;
      }
    }
    if (best_err <= max_error) {
      for (std::int64_t n = best_n; n <= n_max && members.size() < count; n += period) members.push_back(n);
    }
  } else {
    members = detail::best_scan(n_max, count, max_error, error);
  }
  js.first.members = members;
  js.second.members = members;
  detail::finalize(js.first, count, r1);
  detail::finalize(js.second, count, r2);
  return js;
}

}  // namespace dosfluct
