#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hardylab/quadrature.hpp"

using namespace hardylab;

namespace {
constexpr double kInvLog2 = 1.4426950408889634074;  // 1/log 2
constexpr double kLog2 = 0.6931471805599453094;

struct BumpSum {
  std::vector<double> c, w, a;
  double operator()(double t) const {
    double v = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
      const double x = (t - c[i]) / w[i];
      v += a[i] * std::exp(-x * x);
    }
    return v;
  }
};

BumpSum random_bumps(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nd(1, 5);
  std::uniform_real_distribution<double> cd(0.1, 0.9), wd(0.02, 0.3), ad(-2.0, 2.0);
  BumpSum b;
  const int n = nd(rng);
  for (int i = 0; i < n; ++i) {
    b.c.push_back(cd(rng));
    b.w.push_back(wd(rng));
    b.a.push_back(ad(rng));
  }
  return b;
}

double midpoint_riemann(const std::function<double(double)>& f, double a, double b,
                        long n) {
  double s = 0.0;
  const double h = (b - a) / static_cast<double>(n);
  for (long i = 0; i < n; ++i) s += f(a + (static_cast<double>(i) + 0.5) * h);
  return s * h;
}
}  // namespace

TEST_CASE("closed-form singular and smooth cases") {
  SUBCASE("inverse square root") {
    Integrand g;
    g.f = [](double t) { return 1.0 / std::sqrt(t); };
    g.singular_left = SingularHint{-0.5, 0.0, 1.0};
    auto r = integrate(g, 0.0, 1.0);
    CHECK(r.converged);
    CHECK(std::abs(r.value - 2.0) <= 1e-9);
  }
  SUBCASE("cosine") {
    auto r = integrate([](double t) { return std::cos(t); }, 0.0,
                       3.14159265358979323846 / 2.0);
    CHECK(r.converged);
    CHECK(std::abs(r.value - 1.0) <= 1e-12);
  }
  SUBCASE("log-power singularity at zero") {
    Integrand g;
    g.f = [](double s) { return std::pow(std::log(1.0 / s), -2.0) / s; };
    g.singular_left = SingularHint{-1.0, -2.0, 1.0};
    auto r = integrate(g, 0.0, 0.5);
    CHECK(std::abs(r.value - kInvLog2) <= 1e-7 * kInvLog2);
    CHECK(r.abs_error_est <= 1e-6);
  }
  SUBCASE("unhinted power singularity") {
    auto r = integrate([](double t) { return std::pow(t, -0.5); }, 0.0, 1.0);
    CHECK(std::abs(r.value - 2.0) <= 1e-8);
  }
}

TEST_CASE("oracle equivalence on random smooth integrands") {
  std::mt19937_64 rng(12345);
  for (int k = 0; k < 10; ++k) {
    BumpSum b = random_bumps(rng);
    auto f = [&b](double t) { return b(t); };
    auto r = integrate(f, 0.0, 1.0);
    const double oracle = midpoint_riemann(f, 0.0, 1.0, 1'000'000);
    CHECK(r.converged);
    CHECK(std::abs(r.value - oracle) <= 1e-7 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("monotone convergence when tightening rtol") {
  std::mt19937_64 rng(777);
  for (int k = 0; k < 5; ++k) {
    BumpSum b = random_bumps(rng);
    auto f = [&b](double t) { return b(t); };
    const double oracle = midpoint_riemann(f, 0.0, 1.0, 1'000'000);
    QuadOptions loose;
    loose.rtol = 1e-6;
    QuadOptions tight;
    tight.rtol = 1e-7;
    const double d_loose = std::abs(integrate(f, 0.0, 1.0, loose).value - oracle);
    const double d_tight = std::abs(integrate(f, 0.0, 1.0, tight).value - oracle);
    CHECK(d_tight <= d_loose + 1e-7);
  }
}

TEST_CASE("split correctness at a declared kink") {
  Integrand g;
  g.f = [](double t) { return std::abs(t - 0.3); };
  g.breakpoints = {0.3};
  auto whole = integrate(g, 0.0, 1.0);
  auto left = integrate(g, 0.0, 0.3);
  auto right = integrate(g, 0.3, 1.0);
  CHECK(std::abs(whole.value - (left.value + right.value)) <=
        whole.abs_error_est + left.abs_error_est + right.abs_error_est + 1e-14);
  CHECK(whole.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-12));
}

TEST_CASE("infinite upper limits") {
  SUBCASE("exponential tail") {
    auto r = integrate([](double t) { return std::exp(-t); }, 0.0, ExtReal::infinity());
    CHECK(std::abs(r.value - 1.0) <= 1e-9);
    CHECK_FALSE(r.truncated_at_cap);
  }
  SUBCASE("quadratic tail") {
    auto r = integrate([](double t) { return 1.0 / (t * t); }, 1.0, ExtReal::infinity());
    CHECK(std::abs(r.value - 1.0) <= 1e-6);
  }
  SUBCASE("slow polynomial tail hits the cap with a recorded bound") {
    QuadOptions o;
    o.t_max_cap = 1e3;
    auto r = integrate([](double t) { return std::pow(1.0 + t, -1.001); }, 0.0,
                       ExtReal::infinity(), o);
    CHECK(r.truncated_at_cap);
    CHECK(r.tail_bound > 0.0);
  }
}

TEST_CASE("failure modes") {
  SUBCASE("NaN is rejected with location") {
    CHECK_THROWS_AS(
        integrate([](double t) { return t < 0.5 ? 1.0 : std::nan(""); }, 0.0, 1.0),
        numerical_error);
  }
  SUBCASE("budget exhaustion returns best estimate unconverged") {
    QuadOptions o;
    o.max_evals = 2000;
    Integrand g;
    g.f = [](double t) { return std::pow(t, -0.999); };
    g.singular_left = SingularHint{-0.999, 0.0, 1.0};
    auto r = integrate(g, 0.0, 1.0, o);
    CHECK_FALSE(r.converged);
    CHECK(r.value > 0.0);
  }
}

TEST_CASE("h1_h2 finiteness dichotomy and values") {
  SUBCASE("s2 > -1 gives finite H1") {
    auto [h1, h2] = h1_h2(0.0, 3.7, -0.5, 1.0, 0.25, 0.5);
    CHECK_FALSE(h1.divergent);
    CHECK_FALSE(h2.divergent);
  }
  SUBCASE("s1 = -1, s2 = -1 diverges") {
    auto [h1, h2] = h1_h2(0.0, -1.0, -1.0, 1.0, 0.25, 0.5);
    CHECK(h1.divergent);
    CHECK_FALSE(h2.divergent);
  }
  SUBCASE("H2 closed form") {
    auto [h1, h2] = h1_h2(0.0, 0.0, 0.0, 1.0, 0.25, 0.5);
    CHECK_FALSE(h2.divergent);
    // int_{1/4}^{1/2} log(1/s) ds = [s(1 - log s)] = 1/4 exactly.
    CHECK(std::abs(h2.quad.value - 0.25) <= 1e-9);
  }
  SUBCASE("H1 closed form in the s2 = -1 case") {
    auto [h1, h2] = h1_h2(0.0, -2.0, -1.0, 1.0, 0.5, 0.75);
    CHECK_FALSE(h1.divergent);
    CHECK(std::abs(h1.quad.value - kInvLog2) <= 1e-6 * kInvLog2);
  }
  SUBCASE("H2 divergence at l2 = D with s1 <= -1") {
    auto [h1, h2] = h1_h2(0.0, -1.5, 0.0, 1.0, 0.25, 1.0);
    CHECK(h2.divergent);
  }
  SUBCASE("ordering violations") {
    CHECK_THROWS_AS(h1_h2(0.0, 0.0, 0.0, 1.0, 0.5, 0.25), config_error);
    CHECK_THROWS_AS(h1_h2(0.0, 0.0, 0.0, 1.0, 0.5, 1.5), config_error);
  }
}

TEST_CASE("log_slope_divergence_test") {
  Integrand inv;
  inv.f = [](double t) { return 1.0 / t; };
  CHECK(log_slope_divergence_test(inv, 0.0, 1.0) == SlopeClass::divergent);

  Integrand root;
  root.f = [](double t) { return 1.0 / std::sqrt(t); };
  CHECK(log_slope_divergence_test(root, 0.0, 1.0) == SlopeClass::convergent);

  Integrand strong;
  strong.f = [](double t) { return std::pow(t, -1.5); };
  CHECK(log_slope_divergence_test(strong, 0.0, 1.0) == SlopeClass::divergent);

  Integrand osc;
  osc.f = [](double t) { return std::sin(50.0 / t); };
  CHECK(log_slope_divergence_test(osc, 0.0, 1.0) == SlopeClass::inconclusive);

  // Right-endpoint variant: [log(pi/r)]^{-2}/r blows up as r -> pi when the
  // log power drops below -1.
  Integrand cyl;
  cyl.f = [](double r) { return std::pow(std::log(3.14159265358979 / r), -2.0) / r; };
  CHECK(log_slope_divergence_test_right(cyl, 1.0, 3.14159265358979) ==
        SlopeClass::divergent);
}
