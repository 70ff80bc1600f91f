#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dosfluct/rng.hpp"
#include "dosfluct/stats.hpp"

using namespace dosfluct;

namespace {

std::vector<double> gaussians(std::size_t n, std::uint64_t seed, double mu = 0.0, double sigma = 1.0) {
  PhiloxStream rng({seed, 0});
  std::vector<double> out(n);
  for (double& x : out) x = mu + sigma * rng.next_normal();
  return out;
}

}  // namespace

TEST_CASE("normality statistics of synthetic Gaussians") {
  const auto xs = gaussians(10000, 1);
  const auto s = normality_stats(xs, 1.0);
  REQUIRE_FALSE(s.degenerate);
  // 3 sampling standard errors: sqrt(6/n) and sqrt(24/n)
  REQUIRE(std::abs(s.skewness) < 0.08);
  REQUIRE(std::abs(s.excess_kurtosis) < 0.16);
  REQUIRE(s.ks_statistic < ks_critical_1pct(xs.size()));
  REQUIRE(anderson_darling(xs, 0.0, 1.0) < kAndersonDarlingCritical1pct);
}

TEST_CASE("degenerate and undersized samples") {
  const std::vector<double> flat(50, 3.0);
  REQUIRE(normality_stats(flat, 1.0).degenerate);
  REQUIRE_THROWS_AS(normality_stats(std::vector<double>(29, 0.0), 1.0), DomainError);
}

TEST_CASE("KS detects a shifted Gaussian") {
  const auto xs = gaussians(2000, 2, 0.3);
  REQUIRE(normality_stats(xs, 1.0).ks_statistic > ks_critical_1pct(xs.size()));
  REQUIRE(anderson_darling(xs, 0.0, 1.0) > kAndersonDarlingCritical1pct);
}

TEST_CASE("moments and their standard errors") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const Moments m = moments(xs);
  REQUIRE(m.mean == 2.5);
  REQUIRE(m.variance == Catch::Approx(5.0 / 3.0));
  REQUIRE(m.mean_se() == Catch::Approx(std::sqrt(5.0 / 12.0)));
  REQUIRE(m.skewness() == Catch::Approx(0.0).margin(1e-15));
  // the variance standard error tracks the sampling spread of the variance
  std::vector<double> variances;
  double se_sum = 0.0;
  for (std::uint64_t rep = 0; rep < 400; ++rep) {
    const Moments r = moments(gaussians(200, 100 + rep));
    variances.push_back(r.variance);
    se_sum += r.variance_se();
  }
  const double spread = std::sqrt(moments(variances).variance);
  REQUIRE(se_sum / 400.0 == Catch::Approx(spread).epsilon(0.15));
}

TEST_CASE("sample covariance and its standard error") {
  auto a = gaussians(5000, 3);
  auto b = gaussians(5000, 4);
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = 0.6 * a[i] + 0.8 * b[i];
  REQUIRE(std::abs(covariance(a, c) - 0.6) < 3.0 * covariance_se(a, c));
  REQUIRE(std::abs(covariance(a, b)) < 3.0 * covariance_se(a, b));
  REQUIRE_THROWS_AS(covariance(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("scaling regression on exact power laws") {
  const std::vector<double> n{1000.0, 2000.0, 4000.0};
  std::vector<double> v;
  for (double x : n) v.push_back(3.0 * std::pow(x, 0.4));
  const auto fit = scaling_regression(n, v);
  REQUIRE(std::abs(fit.exponent - 0.4) < 1e-12);
  REQUIRE(fit.r2 == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(std::exp(fit.intercept) == Catch::Approx(3.0));
  REQUIRE_THROWS_AS(scaling_regression(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}), DomainError);
  REQUIRE_THROWS_AS(scaling_regression(n, std::vector<double>{1.0, 0.0, 2.0}), DomainError);
}

TEST_CASE("logarithmic growth regression") {
  const std::vector<double> n{1e3, 1e4, 1e5};
  std::vector<double> v;
  for (double x : n) v.push_back(0.02 * std::log(x) + 0.1);
  const auto fit = log_growth_regression(n, v);
  REQUIRE(fit.slope == Catch::Approx(0.02));
  REQUIRE(fit.intercept == Catch::Approx(0.1));
  REQUIRE_THROWS_AS(log_growth_regression(n, std::vector<double>{1.0, -1.0, 2.0}), DomainError);
}

TEST_CASE("total variation between integer laws") {
  const std::vector<long long> a{0, 0, 1, 1};
  const std::vector<long long> b{0, 1, 1, 1};
  REQUIRE(total_variation(a, b) == Catch::Approx(0.25));
  REQUIRE(total_variation(a, a) == 0.0);
  const std::vector<long long> c{5, 5};
  REQUIRE(total_variation(a, c) == Catch::Approx(1.0));
}
