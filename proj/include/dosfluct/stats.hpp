#pragma once

// Sample statistics used to judge Monte Carlo reproductions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "dosfluct/errors.hpp"

namespace dosfluct {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double m2 = 0.0;        // central moments (biased)
  double m3 = 0.0;
  double m4 = 0.0;

  double mean_se() const { return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0; }

  /// Standard error of the unbiased variance estimator, using the sample fourth moment.
  double variance_se() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double v = m4 - m2 * m2 * (n - 3.0) / (n - 1.0);
    return std::sqrt(std::max(v, 0.0) / n);
  }

  double skewness() const { return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0; }
  double excess_kurtosis() const { return m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0; }
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  for (double x : xs) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const double n = static_cast<double>(xs.size());
  m.variance = xs.size() > 1 ? m.m2 / (n - 1.0) : 0.0;
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

/// Unbiased sample covariance.
inline double covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("covariance: need two equal-length samples (>= 2)");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) c += (xs[i] - mx) * (ys[i] - my);
  return c / (n - 1.0);
}

/// Standard error of the sample covariance (delta method on products of centered values).
inline double covariance_se(std::span<const double> xs, std::span<const double> ys) {
  const double c = covariance(xs, ys);
  const double n = static_cast<double>(xs.size());
  const Moments mx = moments(xs);
  const Moments my = moments(ys);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double p = (xs[i] - mx.mean) * (ys[i] - my.mean) - c;
    s += p * p;
  }
  return std::sqrt(s / (n - 1.0) / n);
}

inline double normal_cdf(double x, double sigma = 1.0) { return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2)); }

/// sup |F_n - Phi_sigma|
inline double ks_distance(std::vector<double> xs, double sigma) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i], sigma);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS distance.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// Anderson-Darling A^2 against a fully specified N(mu, sigma^2).
inline double anderson_darling(std::vector<double> xs, double mu, double sigma) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = std::clamp(normal_cdf(xs[i] - mu, sigma), 1e-300, 1.0 - 1e-16);
    const double fj = std::clamp(normal_cdf(xs[n - 1 - i] - mu, sigma), 1e-300, 1.0 - 1e-16);
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(fi) + std::log1p(-fj));
  }
  return -static_cast<double>(n) - s / static_cast<double>(n);
}

/// 1% critical value of A^2 for a fully specified null.
inline constexpr double kAndersonDarlingCritical1pct = 3.857;

struct NormalityStats {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_statistic = 0.0;
  bool degenerate = false;
};

/// Skewness, excess kurtosis and KS distance to N(0, predicted_variance).
inline NormalityStats normality_stats(std::span<const double> samples, double predicted_variance) {
  if (samples.size() < 30) throw DomainError("normality_stats: need at least 30 samples");
  NormalityStats out;
  const Moments m = moments(samples);
  if (!(m.m2 > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.skewness = m.skewness();
  out.excess_kurtosis = m.excess_kurtosis();
  if (predicted_variance > 0.0) {
    out.ks_statistic = ks_distance({samples.begin(), samples.end()}, std::sqrt(predicted_variance));
  }
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least_squares: need two equal-length samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("least_squares: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Fit log(variance) = exponent * log(n) + intercept.
inline ScalingFit scaling_regression(std::span<const double> n_values, std::span<const double> variances) {
  if (n_values.size() != variances.size()) throw DomainError("scaling_regression: length mismatch");
  if (n_values.size() < 3) throw DomainError("scaling_regression: need at least 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(n_values[i] > 0.0) || !(variances[i] > 0.0)) {
      throw DomainError("scaling_regression: n and variance must be positive");
    }
    lx.push_back(std::log(n_values[i]));
    ly.push_back(std::log(variances[i]));
  }
  const LinearFit f = least_squares(lx, ly);
  return {f.slope, f.intercept, f.r2};
}

/// Fit variance = slope * log(n) + intercept (logarithmic growth).
inline LinearFit log_growth_regression(std::span<const double> n_values, std::span<const double> variances) {
  if (n_values.size() != variances.size()) throw DomainError("log_growth_regression: length mismatch");
  if (n_values.size() < 3) throw DomainError("log_growth_regression: need at least 3 points");
  std::vector<double> lx;
  for (double n : n_values) {
    if (!(n > 1.0)) throw DomainError("log_growth_regression: n must exceed 1");
    lx.push_back(std::log(n));
  }
  for (double v : variances) {
    if (!(v > 0.0)) throw DomainError("log_growth_regression: variance must be positive");
  }
  return least_squares(lx, variances);
}

/// Total-variation distance between the empirical laws of two integer samples.
inline double total_variation(std::span<const long long> a, std::span<const long long> b) {
  if (a.empty() || b.empty()) throw DomainError("total_variation: empty sample");
  // integer tallies so that identical laws give exactly zero
  std::map<long long, std::pair<double, double>> tally;
  for (long long x : a) tally[x].first += 1.0;
  for (long long x : b) tally[x].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double tv = 0.0;
  for (const auto& [_, c] : tally) tv += std::abs(c.first * nb - c.second * na);
  return 0.5 * tv / (na * nb);
}

}  // namespace dosfluct
