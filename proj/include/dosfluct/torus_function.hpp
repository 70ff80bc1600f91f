#pragma once

// Exact calculus on finite Fourier series over the circle R / 2piZ.
//
// A TorusFunction stores f(x) = sum_k c_k e^{ikx} with finitely many nonzero
// c_k. The Haar measure is normalized, so <f> = c_0. The generator of the
// driving Brownian motion acts diagonally: L e^{ikx} = lambda_k e^{ikx}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dosfluct/errors.hpp"

namespace dosfluct {

using cplx = std::complex<double>;

/// Normalization of the generator L. `half_laplacian` (L = 1/2 d^2/dx^2)
/// pairs with unit-rate Brownian increments and makes the bracket of the
/// stochastic integral equal to f' g'. `laplacian` exists for sensitivity checks.
enum class GeneratorConvention { half_laplacian, laplacian };

inline double generator_eigenvalue(int k, GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  const double k2 = static_cast<double>(k) * static_cast<double>(k);
  return conv == GeneratorConvention::half_laplacian ? -0.5 * k2 : -k2;
}

class TorusFunction {
 public:
  using Coeffs = std::map<int, cplx>;

  TorusFunction() = default;

  /// Builds from a coefficient map. When `real_valued` is set the map must be
  /// conjugate-symmetric up to rounding; it is then symmetrized exactly from
  /// the nonnegative frequencies.
  TorusFunction(Coeffs coeffs, bool real_valued) : coeffs_(std::move(coeffs)), real_valued_(real_valued) {
    if (real_valued_) {
      for (const auto& [k, c] : coeffs_) {
        const cplx mirror = coeff(-k);
        const double scale = std::max({1.0, std::abs(c), std::abs(mirror)});
        if (std::abs(c - std::conj(mirror)) > 1e-12 * scale) {
          throw DomainError("real_valued TorusFunction violates c_{-k} = conj(c_k) at k = " + std::to_string(k));
        }
      }
      symmetrize();
    }
    prune();
  }

  static TorusFunction constant(double value) { return TorusFunction({{0, cplx(value, 0.0)}}, true); }

  /// amplitude * cos(k x)
  static TorusFunction cosine(int k, double amplitude = 1.0) {
    if (k == 0) return constant(amplitude);
    return TorusFunction({{k, 0.5 * amplitude}, {-k, 0.5 * amplitude}}, true);
  }

  /// amplitude * sin(k x)
  static TorusFunction sine(int k, double amplitude = 1.0) {
    if (k == 0) return {};
    return TorusFunction({{k, cplx(0.0, -0.5 * amplitude)}, {-k, cplx(0.0, 0.5 * amplitude)}}, true);
  }

  /// amplitude * e^{ikx}
  static TorusFunction exponential(int k, cplx amplitude = 1.0) {
    return TorusFunction({{k, amplitude}}, k == 0 && amplitude.imag() == 0.0);
  }

  const Coeffs& coeffs() const { return coeffs_; }
  bool real_valued() const { return real_valued_; }
  bool is_zero() const { return coeffs_.empty(); }

  cplx coeff(int k) const {
    auto it = coeffs_.find(k);
    return it == coeffs_.end() ? cplx{} : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [k, c] : coeffs_) d = std::max(d, std::abs(k));
    return d;
  }

  cplx evaluate(double x) const {
    cplx sum{};
    for (const auto& [k, c] : coeffs_) sum += c * std::polar(1.0, static_cast<double>(k) * x);
    return sum;
  }

  TorusFunction conj() const {
    Coeffs out;
    for (const auto& [k, c] : coeffs_) out[-k] = std::conj(c);
    return from_raw(std::move(out), real_valued_);
  }

  TorusFunction operator+(const TorusFunction& other) const {
    Coeffs out = coeffs_;
    for (const auto& [k, c] : other.coeffs_) out[k] += c;
    return from_raw(std::move(out), real_valued_ && other.real_valued_);
  }

  TorusFunction operator-(const TorusFunction& other) const { return *this + other * cplx(-1.0); }

  TorusFunction operator*(cplx scalar) const {
    Coeffs out;
    for (const auto& [k, c] : coeffs_) out[k] = c * scalar;
    return from_raw(std::move(out), real_valued_ && scalar.imag() == 0.0);
  }

  friend bool operator==(const TorusFunction& a, const TorusFunction& b) {
    return a.real_valued_ == b.real_valued_ && a.coeffs_ == b.coeffs_;
  }

  /// Skips validation; for results whose symmetry holds by construction.
  static TorusFunction from_raw(Coeffs coeffs, bool real_valued) {
    TorusFunction f;
    f.coeffs_ = std::move(coeffs);
    f.real_valued_ = real_valued;
    if (real_valued) f.symmetrize();
    f.prune();
    return f;
  }

 private:
  void symmetrize() {
    Coeffs sym;
    for (const auto& [k, c] : coeffs_) {
      if (k < 0) continue;
      if (k == 0) {
        sym[0] = cplx(c.real(), 0.0);
      } else {
        sym[k] = c;
        sym[-k] = std::conj(c);
      }
    }
    // frequencies present only on the negative side
    for (const auto& [k, c] : coeffs_) {
      if (k < 0 && !coeffs_.count(-k)) {
        sym[-k] = std::conj(c);
        sym[k] = c;
      }
    }
    coeffs_ = std::move(sym);
  }

  void prune() {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (it->second == cplx{}) {
        it = coeffs_.erase(it);
      } else {
        ++it;
      }
    }
  }

  Coeffs coeffs_;
  bool real_valued_ = true;
};

inline TorusFunction operator*(cplx scalar, const TorusFunction& f) { return f * scalar; }

inline cplx mean(const TorusFunction& f) { return f.coeff(0); }

/// k -> i k c_k
inline TorusFunction gradient(const TorusFunction& f) {
  TorusFunction::Coeffs out;
  for (const auto& [k, c] : f.coeffs()) {
    if (k != 0) out[k] = cplx(0.0, static_cast<double>(k)) * c;
  }
  return TorusFunction::from_raw(std::move(out), f.real_valued());
}

/// Exact convolution of the coefficient maps.
inline TorusFunction multiply(const TorusFunction& f, const TorusFunction& g) {
  const bool real = f.real_valued() && g.real_valued();
  TorusFunction::Coeffs out;
  for (const auto& [j, a] : f.coeffs()) {
    for (const auto& [k, b] : g.coeffs()) {
      if (real && j + k < 0) continue;  // mirrored by from_raw
      out[j + k] += a * b;
    }
  }
  return TorusFunction::from_raw(std::move(out), real);
}

/// [f, g] = f' g' on the one-dimensional torus.
inline TorusFunction carre_du_champ(const TorusFunction& f, const TorusFunction& g) {
  return multiply(gradient(f), gradient(g));
}

/// (L + i s) h, the forward operator the resolvents invert.
inline TorusFunction apply_shifted_generator(const TorusFunction& h, double shift,
                                             GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  TorusFunction::Coeffs out;
  for (const auto& [k, c] : h.coeffs()) out[k] = c * cplx(generator_eigenvalue(k, conv), shift);
  return TorusFunction::from_raw(std::move(out), h.real_valued() && shift == 0.0);
}

/// (L + i beta kappa_shift)^{-1} h. With a zero shift only mean-zero input is invertible.
inline TorusFunction resolvent_shifted(const TorusFunction& h, double kappa_shift, int beta,
                                       GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  const double shift = static_cast<double>(beta) * kappa_shift;
  if (shift == 0.0 && mean(h) != cplx{}) {
    const cplx m = mean(h);
    throw DomainError("resolvent with zero shift requires mean-zero input, got mean (" + std::to_string(m.real()) +
                      ", " + std::to_string(m.imag()) + ")");
  }
  TorusFunction::Coeffs out;
  for (const auto& [k, c] : h.coeffs()) out[k] = c / cplx(generator_eigenvalue(k, conv), shift);
  return TorusFunction::from_raw(std::move(out), h.real_valued() && shift == 0.0);
}

/// L^{-1}(h - <h>); the result has zero mean.
inline TorusFunction resolvent_zero(const TorusFunction& h,
                                    GeneratorConvention conv = GeneratorConvention::half_laplacian) {
  TorusFunction::Coeffs out;
  for (const auto& [k, c] : h.coeffs()) {
    if (k != 0) out[k] = c / generator_eigenvalue(k, conv);
  }
  return TorusFunction::from_raw(std::move(out), h.real_valued());
}

/// Largest coefficientwise modulus of f - g.
inline double max_coeff_distance(const TorusFunction& f, const TorusFunction& g) {
  double worst = 0.0;
  for (const auto& [k, c] : f.coeffs()) worst = std::max(worst, std::abs(c - g.coeff(k)));
  for (const auto& [k, c] : g.coeffs()) worst = std::max(worst, std::abs(c - f.coeff(k)));
  return worst;
}

// JSON: {"real_valued": bool, "coeffs": [[k, re, im], ...]} sorted by k.

inline void to_json(nlohmann::json& j, const TorusFunction& f) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [k, c] : f.coeffs()) coeffs.push_back({k, c.real(), c.imag()});
  j = nlohmann::json{{"real_valued", f.real_valued()}, {"coeffs", coeffs}};
}

inline void from_json(const nlohmann::json& j, TorusFunction& f) {
  if (!j.is_object()) throw ConfigError("TorusFunction: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "real_valued" && key != "coeffs") throw ConfigError("TorusFunction: unknown field '" + key + "'");
  }
  if (!j.contains("coeffs") || !j.at("coeffs").is_array()) throw ConfigError("TorusFunction: 'coeffs' must be an array");
  const bool real = j.value("real_valued", false);
  TorusFunction::Coeffs coeffs;
  for (const auto& entry : j.at("coeffs")) {
    if (!entry.is_array() || entry.size() != 3 || !entry[0].is_number_integer() || !entry[1].is_number() ||
        !entry[2].is_number()) {
      throw ConfigError("TorusFunction: each coefficient must be [k, re, im] with integer k");
    }
    const int k = entry[0].get<int>();
    if (coeffs.count(k)) throw ConfigError("TorusFunction: duplicate frequency " + std::to_string(k));
    coeffs[k] = cplx(entry[1].get<double>(), entry[2].get<double>());
  }
  try {
    f = TorusFunction(std::move(coeffs), real);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

/// Fast pointwise evaluator of a real trigonometric polynomial
/// c0 + sum_k (a_k cos kx + b_k sin kx).
class RealTrigEvaluator {
 public:
  RealTrigEvaluator() = default;

  explicit RealTrigEvaluator(const TorusFunction& f) {
    if (!f.real_valued()) throw DomainError("RealTrigEvaluator requires a real-valued TorusFunction");
    c0_ = f.coeff(0).real();
    const int d = f.degree();
    cos_.assign(static_cast<std::size_t>(d), 0.0);
    sin_.assign(static_cast<std::size_t>(d), 0.0);
    for (int k = 1; k <= d; ++k) {
      const cplx c = f.coeff(k);
      cos_[static_cast<std::size_t>(k - 1)] = 2.0 * c.real();
      sin_[static_cast<std::size_t>(k - 1)] = -2.0 * c.imag();
    }
    zero_ = f.is_zero();
  }

  bool is_zero() const { return zero_; }

  double operator()(double x) const {
    if (cos_.empty()) return c0_;
    if (cos_.size() == 1) {
      const double s = sin_[0];
      return s == 0.0 ? c0_ + cos_[0] * std::cos(x) : c0_ + cos_[0] * std::cos(x) + s * std::sin(x);
    }
    const double c1 = std::cos(x);
    const double s1 = std::sin(x);
    double ck = c1;
    double sk = s1;
    double sum = c0_;
    for (std::size_t i = 0; i < cos_.size(); ++i) {
      sum += cos_[i] * ck + sin_[i] * sk;
      const double cn = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = cn;
    }
    return sum;
  }

 private:
  double c0_ = 0.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
  bool zero_ = true;
};

}  // namespace dosfluct
