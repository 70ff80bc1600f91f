#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "dosfluct/constants.hpp"

using namespace dosfluct;

namespace {

// Independent Fourier-space implementation of T^{kind}_{beta}: plain maps and
// explicit convolution, no library operators.
using Series = std::map<int, cplx>;

Series series_of(const TorusFunction& f) { return {f.coeffs().begin(), f.coeffs().end()}; }

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
  auto it = s.find(0);
  return it == s.end() ? cplx{} : it->second;
}

// Sum over Motzkin paths by dynamic programming on the path height; no enumeration.
cplx dp_Ck(const Series& F, double kappa, int k) {
  std::map<int, Series> level{{0, F}};
  for (int step = 0; step < k - 1; ++step) {
    std::map<int, Series> next;
    for (const auto& [height, h] : level) {
      const int beta = 2 * (height + 1);
      for (int e : {-1, 0, 1}) {
        if (height + e < 0) continue;
        const char kind = e == 1 ? '+' : (e == -1 ? '-' : '0');
        for (const auto& [q, c] : hand_T(F, h, beta, kappa, kind)) next[height + e][q] += c;
      }
    }
    level = std::move(next);
  }
  return hand_mean(hand_T(F, level[0], 2, kappa, '-'));
}

constexpr std::size_t kMotzkin[] = {1, 1, 2, 4, 9, 21, 51};

}  // namespace

TEST_CASE("index sets have Motzkin cardinalities and valid betas") {
  for (int k = 1; k <= 7; ++k) {
    const auto S = enumerate_Sk(k);
    REQUIRE(S.size() == kMotzkin[k - 1]);
    for (const auto& idx : S) {
      REQUIRE(idx.epsilons.size() == static_cast<std::size_t>(k - 1));
      int height = 0;
      for (std::size_t i = 0; i < idx.epsilons.size(); ++i) {
        REQUIRE(idx.betas[i] == 2 * (height + 1));
        height += idx.epsilons[i];
        REQUIRE(height >= 0);
      }
      REQUIRE(height == 0);
    }
  }
  REQUIRE_THROWS_AS(enumerate_Sk(0), DomainError);
}

TEST_CASE("C_1 of cosine has the closed form (-4 + i)/34 at kappa = 1") {
  const auto table = compute_Ck(TorusFunction::cosine(1), 1.0, 1);
  REQUIRE(std::abs(table.values[0] - cplx(-4.0, 1.0) / 34.0) < 1e-12);
  for (double kappa : {0.3, 0.8, 1.3, 2.5}) {
    const cplx c1 = compute_Ck(TorusFunction::cosine(1), kappa, 1).values[0];
    REQUIRE(std::abs(c1.real() + 2.0 / (16.0 * kappa * kappa + 1.0)) < 1e-12);
  }
}

TEST_CASE("C_2 and C_3 match the displayed instances") {
  // F with both parities so that C_2 does not vanish by symmetry
  const TorusFunction F = TorusFunction::cosine(1) + TorusFunction::cosine(2, 0.7) + TorusFunction::sine(1, 0.4);
  const Series f = series_of(F);
  for (double kappa : {0.6, 1.0, 1.7}) {
    const auto table = compute_Ck(F, kappa, 3);
    const cplx c2 = hand_mean(hand_T(f, hand_T(f, f, 2, kappa, '0'), 2, kappa, '-'));
    const cplx c3 = hand_mean(hand_T(f, hand_T(f, hand_T(f, f, 2, kappa, '+'), 4, kappa, '-'), 2, kappa, '-')) +
                    hand_mean(hand_T(f, hand_T(f, hand_T(f, f, 2, kappa, '0'), 2, kappa, '0'), 2, kappa, '-'));
    REQUIRE(std::abs(c2) > 1e-4);
    REQUIRE(std::abs(table.values[1] - c2) < 1e-12);
    REQUIRE(std::abs(table.values[2] - c3) < 1e-12);
  }
  // odd symmetry of cos x kills C_2
  REQUIRE(std::abs(compute_Ck(TorusFunction::cosine(1), 1.0, 2).values[1]) < 1e-15);
}

TEST_CASE("general recursion agrees with a dynamic-programming oracle up to order 7") {
  const TorusFunction F = TorusFunction::cosine(1) + TorusFunction::sine(2, 0.5);
  const Series f = series_of(F);
  const auto table = compute_Ck(F, 0.9, 7);
  for (int k = 1; k <= 7; ++k) {
    const cplx oracle = dp_Ck(f, 0.9, k);
    REQUIRE(std::abs(table.values[k - 1] - oracle) < 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("covariance constants of cosine") {
  const TorusFunction F = TorusFunction::cosine(1);
  for (double kappa : {0.25, 0.8, 1.0, 1.3, 3.0}) {
    REQUIRE(std::abs(sigma2_kappa(F, kappa) - 2.0 / (1.0 + 16.0 * kappa * kappa)) < 1e-12);
    REQUIRE(std::abs(sigma2_kappa(F, kappa, GeneratorConvention::laplacian) -
                     0.5 / (1.0 + 4.0 * kappa * kappa)) < 1e-12);
  }
  REQUIRE(std::abs(sigma2_zero(F) - 2.0) < 1e-12);
  REQUIRE(std::abs(sigma2_zero(F, GeneratorConvention::laplacian) - 0.5) < 1e-12);
  const auto cc = covariance_constants(F, {0.8, 1.3});
  REQUIRE(cc.at(1.3) == sigma2_kappa(F, 1.3));
  REQUIRE_THROWS_AS(cc.at(2.0), DomainError);
}

TEST_CASE("operator preconditions") {
  const TorusFunction F = TorusFunction::cosine(1);
  REQUIRE_THROWS_AS(apply_T(F, F, 3, 1.0, TKind::plus), DomainError);
  REQUIRE_THROWS_AS(apply_T(F, F, 0, 1.0, TKind::plus), DomainError);
  REQUIRE_THROWS_AS(apply_T(F, F, 2, 0.0, TKind::plus), DomainError);
  REQUIRE_THROWS_AS(compute_Ck(F + TorusFunction::constant(1.0), 1.0, 2), DomainError);
  REQUIRE_THROWS_AS(kind_from_step(2), DomainError);
  // T^+ and T^- coincide; T^0 is -2 times either
  const TorusFunction p = apply_T(F, F, 2, 1.0, TKind::plus);
  REQUIRE(max_coeff_distance(p, apply_T(F, F, 2, 1.0, TKind::minus)) == 0.0);
  REQUIRE(max_coeff_distance(p * cplx(-2.0), apply_T(F, F, 2, 1.0, TKind::zero)) < 1e-15);
}
