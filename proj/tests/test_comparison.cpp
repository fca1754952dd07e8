#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hardylab/comparison.hpp"

using namespace hardylab;

namespace {
constexpr double kPi = 3.14159265358979323846;
// High-precision references (mpmath, 30 digits).
constexpr double kSinh1 = 1.1752011936438014568;
constexpr double kCosh1 = 1.5430806348152437784;
constexpr double kArtanhHalf = 0.5493061443340548456;
constexpr double kG_4_1_neg1 = 3.3876647269544274953;  // tanh(1) + 2 coth(1)

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}
}  // namespace

TEST_CASE("s_lambda and c_lambda branch values") {
  CHECK(s_lambda(0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s_lambda(1.0, kPi / 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s_lambda(-1.0, 1.0) == doctest::Approx(kSinh1).epsilon(1e-15));
  CHECK(c_lambda(0.0, 7.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(c_lambda(1.0, kPi / 2.0)) < 1e-15);
  CHECK(c_lambda(-1.0, 1.0) == doctest::Approx(kCosh1).epsilon(1e-15));
  CHECK_THROWS_AS(s_lambda(std::nan(""), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(c_lambda(1.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("r_lambda and domain") {
  CHECK(r_lambda(4.0).value() == doctest::Approx(kPi / 4.0).epsilon(1e-15));
  CHECK(r_lambda(0.0).is_infinite());
  CHECK(r_lambda(-3.0).is_infinite());
  CHECK(in_domain(1.0, kPi * 0.99));
  CHECK_FALSE(in_domain(1.0, kPi));
  CHECK(in_domain(-1.0, 1e9));
}

TEST_CASE("pythagorean identity across lambda, t grid") {
  for (double lambda : log_spaced(1e-3, 10.0, 40)) {
    for (double sgn : {-1.0, 1.0}) {
      const double lam = sgn * lambda;
      const double t_hi = lam > 0.0 ? 0.999 * 2.0 * r_lambda(lam).value() : 10.0;
      for (double t : log_spaced(1e-3, t_hi, 50)) {
        const double s = s_lambda(lam, t);
        const double c = c_lambda(lam, t);
        const double scale = std::max(1.0, c * c);
        CHECK(std::abs(lam * s * s + c * c - 1.0) <= 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("derivative identities by central differences") {
  for (double lam : {-10.0, -1.0, -1e-4, 0.0, 1e-4, 1.0, 10.0}) {
    const double t_hi = lam > 0.0 ? 0.9 * 2.0 * r_lambda(lam).value() : 8.0;
    for (double t : log_spaced(1e-2, t_hi, 25)) {
      const double h = 1e-6 * std::max(1.0, t);
      const double ds_fd = (s_lambda(lam, t + h) - s_lambda(lam, t - h)) / (2.0 * h);
      const double dc_fd = (c_lambda(lam, t + h) - c_lambda(lam, t - h)) / (2.0 * h);
      const double ref_s = ds_lambda(lam, t);
      const double ref_c = dc_lambda(lam, t);
      CHECK(std::abs(ds_fd - ref_s) <= 1e-6 * std::max(1.0, std::abs(ref_s)));
      CHECK(std::abs(dc_fd - ref_c) <= 1e-6 * std::max(1.0, std::abs(ref_c)));
    }
  }
}

TEST_CASE("branch continuity across lambda = 0") {
  // |s_lam - t| = |lam| t^3/6 + O(lam^2); the tolerance window is chosen where
  // 1e-9 is mathematically attainable.
  for (double lam : {1e-14, -1e-14, 6e-13, -6e-13}) {
    for (double t : {0.5, 2.0, 10.0}) {
      CHECK(std::abs(s_lambda(lam, t) - t) <= 1e-9);
      CHECK(std::abs(c_lambda(lam, t) - 1.0) <= 1e-9);
    }
  }
  // Series/closed-form seam: evaluate just below and above the switch.
  for (double sgn : {-1.0, 1.0}) {
    const double t = 1.0;
    const double lam_lo = sgn * 0.99e-6;  // series side (|lam t^2| < 1e-6)
    const double lam_hi = sgn * 1.01e-6;  // direct side
    const double slope = (s_lambda(lam_hi, t) - s_lambda(lam_lo, t)) / (lam_hi - lam_lo);
    // d s/d lam = -t^3/6 + O(lam); a smooth seam keeps the divided difference
    // at the analytic slope.
    CHECK(slope == doctest::Approx(-1.0 / 6.0).epsilon(1e-4));
  }
}

TEST_CASE("first_zero closed-form table vs bisection") {
  CHECK(first_zero({0.0, 2.0}).value() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(first_zero({1.0, 0.0}).value() == doctest::Approx(kPi / 2.0).epsilon(1e-15));
  CHECK(first_zero({-1.0, 2.0}).value() == doctest::Approx(kArtanhHalf).epsilon(1e-14));
  CHECK(first_zero({0.0, 0.0}).is_infinite());
  CHECK(first_zero({0.0, -1.0}).is_infinite());
  CHECK(first_zero({-1.0, 0.5}).is_infinite());  // kappa^2 <= -lambda

  std::mt19937_64 rng(20240901);
  std::uniform_real_distribution<double> lam_d(-5.0, 5.0), kap_d(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const CurvaturePair pair{lam_d(rng), kap_d(rng)};
    const ExtReal z = first_zero(pair);
    const ExtReal zb = first_zero_bisection(pair);
    REQUIRE(z.finite() == zb.finite());
    if (z.finite()) {
      CHECK(std::abs(z.value() - zb.value()) <= 1e-10 * std::max(1.0, z.value()));
      // Residual and positivity just inside the zero.
      const double r = c_lambda(pair.lambda, z.value()) -
                       pair.kappa * s_lambda(pair.lambda, z.value());
      CHECK(std::abs(r) <= 1e-10);
      const double t_in = z.value() * (1.0 - 1e-9);
      CHECK(c_lambda(pair.lambda, t_in) - pair.kappa * s_lambda(pair.lambda, t_in) > 0.0);
    }
  }
}

TEST_CASE("first_zero ordering under the componentwise order") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-4.0, 4.0), bump(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const CurvaturePair lo{d(rng), d(rng)};
    const CurvaturePair hi{lo.lambda + bump(rng), lo.kappa + bump(rng)};
    CHECK(first_zero(hi) <= first_zero(lo));
  }
}

TEST_CASE("t_horizon") {
  CHECK(t_horizon(0, {1.0, 123.0}).value() == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(t_horizon(2, {0.0, 2.0}).value() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t_horizon(1, {-1.0, -5.0}).is_infinite());
}

TEST_CASE("g_value") {
  CHECK(g_value({3, 0, {0.0, 0.0}}, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(g_value({4, 3, {0.0, 0.0}}, 0.5)) < 1e-14);
  CHECK(g_value({4, 1, {-1.0, 0.0}}, 1.0) == doctest::Approx(kG_4_1_neg1).epsilon(1e-14));
  CHECK_THROWS_AS(g_value({3, 1, {0.0, 2.0}}, 0.6), std::domain_error);  // beyond 1/kappa
  CHECK_THROWS_AS(g_value({3, 0, {0.0, 0.0}}, 0.0), std::domain_error);
  CHECK_THROWS_AS(g_value({2, 2, {0.0, 0.0}}, 0.5), config_error);
  // Near-zero expansion G = (m-n-1)/t - n kappa + O(t).
  const double t = 1e-5;
  CHECK(g_value({5, 2, {0.3, 0.7}}, t) ==
        doctest::Approx(2.0 / t - 2.0 * 0.7).epsilon(1e-4));
}

TEST_CASE("check_g_monotone") {
  auto grid = interior_grid(0.0, 1.0, 100);
  SUBCASE("strict chain") {
    const CurvaturePair lo{-1.0, -1.0}, hi{0.0, 0.0};
    const double end = 10.0;  // t_horizon(2, hi) is infinite
    auto g = interior_grid(0.0, end, 100);
    auto res = check_g_monotone(5, 2, lo, hi, g);
    CHECK(res.ok);
    CHECK(res.worst_margin > 0.0);
  }
  SUBCASE("reflexive") {
    auto res = check_g_monotone(4, 1, {0.5, 0.2}, {0.5, 0.2},
                                interior_grid(0.0, 0.5, 50));
    CHECK(res.ok);
    CHECK(res.worst_margin == doctest::Approx(0.0));
  }
  SUBCASE("n = 0 lambda chain") {
    auto g = interior_grid(0.0, kPi / 2.0, 100);
    auto res = check_g_monotone(3, 0, {0.0, 0.0}, {1.0, 0.0}, g);
    CHECK(res.ok);
  }
  SUBCASE("randomized admissible chains") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(-3.0, 3.0), bump(0.0, 2.0);
    for (int i = 0; i < 100; ++i) {
      CurvaturePair lo{d(rng), d(rng)};
      CurvaturePair hi{lo.lambda + bump(rng), lo.kappa + bump(rng)};
      const int m = 3 + static_cast<int>(bump(rng));
      const int n = static_cast<int>(bump(rng)) % m;
      const ExtReal end = t_horizon(n, hi);
      const double t_hi = std::min(end.value_or(10.0), 10.0);
      auto res = check_g_monotone(m, n, lo, hi, interior_grid(0.0, t_hi, 100));
      CHECK(res.ok);
      CHECK(res.worst_margin >= -1e-12);
    }
  }
  CHECK_THROWS_AS(check_g_monotone(3, 1, {0, 0}, {1, 1}, std::vector<double>{}),
                  config_error);
}

TEST_CASE("lagrange_sum_bound") {
  SUBCASE("hand value at lambda = 0") {
    const std::vector<double> kap{1.0, -1.0};
    auto b = lagrange_sum_bound(0.0, kap, 0.5);
    CHECK(b.lhs == doctest::Approx(-4.0 / 3.0).epsilon(1e-14));
    CHECK(b.rhs == doctest::Approx(0.0));
    CHECK(b.lhs < b.rhs);
  }
  SUBCASE("equality iff all equal") {
    const std::vector<double> kap{0.7, 0.7, 0.7};
    auto b = lagrange_sum_bound(1.0, kap, 0.3);
    CHECK(std::abs(b.lhs - b.rhs) <= 1e-12 * std::max(1.0, std::abs(b.rhs)));
  }
  SUBCASE("Monte Carlo with fixed mean") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double lam : {-1.0, 0.0, 1.0}) {
      for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> kap(4);
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) {
          kap[i] = d(rng);
          sum += kap[i];
        }
        kap[3] = -sum;  // mean zero
        double zmin = 0.6;  // below every first zero for these ranges
        for (double k : kap)
          zmin = std::min(zmin, first_zero({lam, k}).value_or(1e9));
        const double t = 0.5 * zmin;
        auto b = lagrange_sum_bound(lam, kap, t);
        CHECK(b.lhs <= b.rhs + 1e-12);
        double spread = 0.0;
        for (double k : kap) spread = std::max(spread, std::abs(k - 0.0));
        if (spread > 1e-3) CHECK(b.lhs < b.rhs - 1e-15);
      }
    }
  }
  CHECK_THROWS_AS(lagrange_sum_bound(0.0, std::vector<double>{2.0}, 0.7),
                  std::domain_error);
}
