#pragma once

// Decay envelopes a(t) multiplying the random potential.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dosfluct/errors.hpp"

namespace dosfluct {

/// a(t) = (1 + t^2)^{-alpha/2}: smooth, even, a(0) = 1, a(t) t^alpha -> 1.
struct PowerDecay {
  double alpha;
  friend bool operator==(const PowerDecay&, const PowerDecay&) = default;
};

/// a(t) = (log(t + e))^{-delta}
struct LogDecay {
  double delta;
  friend bool operator==(const LogDecay&, const LogDecay&) = default;
};

/// a(t) = lambda
struct Constant {
  double lambda;
  friend bool operator==(const Constant&, const Constant&) = default;
};

/// Decaying coupling constant: a = n^{-alpha} throughout the box [0, n].
struct DcCoupling {
  double alpha;
  double n;

  double lambda() const { return std::pow(n, -alpha); }
  friend bool operator==(const DcCoupling&, const DcCoupling&) = default;
};

class EnvelopeProfile {
 public:
  using Variant = std::variant<PowerDecay, LogDecay, Constant, DcCoupling>;

  template <class Profile>
    requires std::is_constructible_v<Variant, Profile>
  EnvelopeProfile(Profile p) : EnvelopeProfile(Variant(p), 0) {}  // NOLINT(google-explicit-constructor)

 private:
  EnvelopeProfile(Variant v, int) : v_(v) {
    std::visit(
        [](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PowerDecay>) {
            if (!(p.alpha > 0.0)) throw DomainError("PowerDecay: alpha must be positive");
          } else if constexpr (std::is_same_v<P, LogDecay>) {
            if (!(p.delta > 0.0)) throw DomainError("LogDecay: delta must be positive");
          } else if constexpr (std::is_same_v<P, DcCoupling>) {
            if (!(p.alpha > 0.0) || !(p.n > 0.0)) throw DomainError("DcCoupling: alpha and n must be positive");
          }
        },
        v_);
  }


 public:
  const Variant& variant() const { return v_; }

  friend bool operator==(const EnvelopeProfile& a, const EnvelopeProfile& b) { return a.v_ == b.v_; }

  /// True when a(t) does not depend on t.
  bool is_constant() const { return std::holds_alternative<Constant>(v_) || std::holds_alternative<DcCoupling>(v_); }

  double value(double t) const {
    return std::visit(
        [t](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PowerDecay>) {
            return std::pow(1.0 + t * t, -0.5 * p.alpha);
          } else if constexpr (std::is_same_v<P, LogDecay>) {
            return std::pow(std::log(t + std::numbers::e), -p.delta);
          } else if constexpr (std::is_same_v<P, Constant>) {
            return p.lambda;
          } else {
            return p.lambda();
          }
        },
        v_);
  }

  /// int_lo^hi a(s)^m ds
  double power_integral(int m, double lo, double hi) const {
    if (m < 1) throw DomainError("power_integral: m must be >= 1");
    if (hi < lo) return -power_integral(m, hi, lo);
    if (hi == lo) return 0.0;
    if (lo < 0.0) throw DomainError("power_integral: the envelope lives on t >= 0");
    if (const auto* c = std::get_if<Constant>(&v_)) return std::pow(c->lambda, m) * (hi - lo);
    if (const auto* d = std::get_if<DcCoupling>(&v_)) return std::pow(d->lambda(), m) * (hi - lo);
    if (const auto* p = std::get_if<PowerDecay>(&v_)) {
      const double exponent = m * p->alpha;
      if (exponent == 1.0) return std::asinh(hi) - std::asinh(lo);
      if (exponent == 2.0) return std::atan(hi) - std::atan(lo);
    }
    return quadrature(m, lo, hi);
  }

  double power_integral(int m, double T) const {
    if (T < 0.0) throw DomainError("power_integral: T must be >= 0");
    return power_integral(m, 0.0, T);
  }

 private:
  // Adaptive Gauss-Kronrod on geometrically growing panels [0,1], [1,2], [2,4], ...
  double quadrature(int m, double lo, double hi) const {
    auto integrand = [this, m](double s) { return std::pow(value(s), m); };
    double total = 0.0;
    double a = lo;
    while (a < hi) {
      const double b = std::min(hi, std::max(1.0, 2.0 * a));
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, b, 15, 1e-13);
      a = b;
    }
    return total;
  }

  Variant v_;
};

inline double envelope_value(const EnvelopeProfile& p, double t) { return p.value(t); }

inline double envelope_power_integral(const EnvelopeProfile& p, int m, double T) { return p.power_integral(m, T); }

}  // namespace dosfluct
