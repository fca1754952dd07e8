#include "hardylab/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace hardylab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Below this |lambda t^2| the trig/hyperbolic branches lose digits to the
// division by sqrt(|lambda|); a short Taylor series in x = lambda t^2 is exact
// to well under 1 ulp there.
constexpr double kSeriesThreshold = 1e-6;

void reject_nan(double lambda, double t) {
  if (std::isnan(lambda) || std::isnan(t))
    throw std::invalid_argument("comparison kernel: NaN input");
}

// t * (1 - x/6 + x^2/120 - x^3/5040), x = lambda t^2.
double s_series(double t, double x) {
  return t * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0)));
}

// 1 - x/2 + x^2/24 - x^3/720.
double c_series(double x) {
  return 1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0));
}

}  // namespace

double s_lambda(double lambda, double t) {
  reject_nan(lambda, t);
  const double x = lambda * t * t;
  if (std::abs(x) < kSeriesThreshold) return s_series(t, x);
  if (lambda > 0.0) {
    const double w = std::sqrt(lambda);
    return std::sin(w * t) / w;
  }
  const double w = std::sqrt(-lambda);
  return std::sinh(w * t) / w;
}

double c_lambda(double lambda, double t) {
  reject_nan(lambda, t);
  const double x = lambda * t * t;
  if (std::abs(x) < kSeriesThreshold) return c_series(x);
  if (lambda > 0.0) return std::cos(std::sqrt(lambda) * t);
  return std::cosh(std::sqrt(-lambda) * t);
}

double ds_lambda(double lambda, double t) { return c_lambda(lambda, t); }

double dc_lambda(double lambda, double t) { return -lambda * s_lambda(lambda, t); }

ExtReal r_lambda(double lambda) {
  if (std::isnan(lambda)) throw std::invalid_argument("r_lambda: NaN input");
  if (lambda > 0.0) return kPi / (2.0 * std::sqrt(lambda));
  return ExtReal::infinity();
}

bool in_domain(double lambda, double t) {
  if (t < 0.0) return false;
  if (lambda <= 0.0) return true;
  return t < 2.0 * r_lambda(lambda).value();
}

ExtReal first_zero(const CurvaturePair& pair) {
  const double lam = pair.lambda;
  const double kap = pair.kappa;
  if (std::isnan(lam) || std::isnan(kap))
    throw std::invalid_argument("first_zero: NaN input");
  if (lam == 0.0 && kap > 0.0) return 1.0 / kap;
  if (lam > 0.0) {
    const double w = std::sqrt(lam);
    if (kap > 0.0) return std::atan(w / kap) / w;
    if (kap == 0.0) return kPi / (2.0 * w);
    return (kPi - std::atan(w / -kap)) / w;
  }
  if (lam < 0.0 && kap > 0.0 && kap * kap > -lam) {
    const double w = std::sqrt(-lam);
    return std::atanh(w / kap) / w;
  }
  return ExtReal::infinity();
}

ExtReal first_zero_bisection(const CurvaturePair& pair, double search_cap) {
  const auto f = [&](double t) {
    return c_lambda(pair.lambda, t) - pair.kappa * s_lambda(pair.lambda, t);
  };
  double hi_cap = search_cap;
  if (pair.lambda > 0.0) hi_cap = 2.0 * r_lambda(pair.lambda).value();

  // Scan for a sign change; f(0) = 1 > 0.
  double lo = 0.0, hi = 0.0;
  const int kScanSteps = 4096;
  double prev_t = 0.0, prev_f = 1.0;
  for (int i = 1; i <= kScanSteps; ++i) {
    const double t = hi_cap * static_cast<double>(i) / kScanSteps;
    const double ft = f(t);
    if (ft <= 0.0) {
      lo = prev_t;
      hi = t;
      break;
    }
    prev_t = t;
    prev_f = ft;
  }
  (void)prev_f;
  if (hi == 0.0) return ExtReal::infinity();

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

ExtReal t_horizon(int n, const CurvaturePair& pair) {
  if (n > 0) return first_zero(pair);
  return 2.0 * r_lambda(pair.lambda);
}

double g_value(const GProfile& profile, double t) {
  if (profile.m < 2 || profile.n < 0 || profile.n > profile.m - 1)
    throw config_error("g_value: dimensions require m >= 2 and 0 <= n <= m-1");
  const ExtReal end = profile.domain_end();
  if (!(t > 0.0) || !(ExtReal(t) < end))
    throw std::domain_error("g_value: t outside (0, t_horizon)");
  const double lam = profile.pair.lambda;
  const double kap = profile.pair.kappa;
  const double s = s_lambda(lam, t);
  const double c = c_lambda(lam, t);
  if (profile.n == 0) return (profile.m - 1) * c / s;
  const double denom = c - kap * s;
  return -profile.n * (lam * s + kap * c) / denom + (profile.m - profile.n - 1) * c / s;
}

MonotoneCheck check_g_monotone(int m, int n, const CurvaturePair& lower,
                               const CurvaturePair& upper, std::span<const double> grid) {
  if (grid.empty()) throw config_error("check_g_monotone: empty grid");
  if (!leq(lower, upper))
    throw config_error("check_g_monotone: lower must be componentwise <= upper");
  const GProfile g_lo{m, n, lower};
  const GProfile g_hi{m, n, upper};
  double worst = std::numeric_limits<double>::infinity();
  for (double t : grid) worst = std::min(worst, g_value(g_lo, t) - g_value(g_hi, t));
  // Tiny negative margins are floating roundoff, not monotonicity violations.
  return MonotoneCheck{worst >= -1e-12, worst};
}

LagrangeBound lagrange_sum_bound(double lambda, std::span<const double> kappas, double t) {
  if (kappas.empty()) throw config_error("lagrange_sum_bound: empty kappa list");
  for (double k : kappas) {
    const ExtReal z = first_zero({lambda, k});
    if (!(ExtReal(t) < z) || !(t > 0.0))
      throw std::domain_error("lagrange_sum_bound: t beyond a first zero");
  }
  const double s = s_lambda(lambda, t);
  const double c = c_lambda(lambda, t);
  LagrangeBound out;
  for (double k : kappas) out.lhs += -(lambda * s + k * c) / (c - k * s);
  const double kbar =
      std::accumulate(kappas.begin(), kappas.end(), 0.0) / static_cast<double>(kappas.size());
  const ExtReal zbar = first_zero({lambda, kbar});
  if (!(ExtReal(t) < zbar))
    throw std::domain_error("lagrange_sum_bound: t beyond the mean-kappa zero");
  out.rhs = static_cast<double>(kappas.size()) * -(lambda * s + kbar * c) / (c - kbar * s);
  return out;
}

namespace {
constexpr double kStableLogThreshold = 30.0;
}

double log_s_lambda(double lambda, double t) {
  if (lambda < 0.0) {
    const double w = std::sqrt(-lambda);
    if (w * t > kStableLogThreshold)
      return w * t - std::log(2.0) + std::log1p(-std::exp(-2.0 * w * t)) - std::log(w);
  }
  return std::log(s_lambda(lambda, t));
}

double log_c_lambda(double lambda, double t) {
  if (lambda < 0.0) {
    const double w = std::sqrt(-lambda);
    if (w * t > kStableLogThreshold)
      return w * t - std::log(2.0) + std::log1p(std::exp(-2.0 * w * t));
  }
  return std::log(c_lambda(lambda, t));
}

double log_c_minus_ks(double lambda, double K, double t) {
  if (lambda < 0.0) {
    const double w = std::sqrt(-lambda);
    if (w * t > kStableLogThreshold && std::abs(K) < w) {
      // c - K s = e^{wt} (1 - K/w)/2 + e^{-wt} (1 + K/w)/2.
      const double r = K / w;
      return w * t - std::log(2.0) +
             std::log((1.0 - r) + (1.0 + r) * std::exp(-2.0 * w * t));
    }
  }
  return std::log(c_lambda(lambda, t) - K * s_lambda(lambda, t));
}

double s_lambda_inverse(double lambda, double sigma) {
  if (std::isnan(lambda) || std::isnan(sigma) || sigma < 0.0)
    throw std::invalid_argument("s_lambda_inverse: bad input");
  if (lambda > 0.0) {
    const double w = std::sqrt(lambda);
    if (sigma * w > 1.0) throw std::domain_error("s_lambda_inverse: sigma beyond 1/sqrt(lambda)");
    return std::asin(sigma * w) / w;
  }
  if (lambda < 0.0) {
    const double w = std::sqrt(-lambda);
    return std::asinh(sigma * w) / w;
  }
  return sigma;
}

std::vector<double> interior_grid(double a, double b, int count) {
  if (!(a < b) || count < 1) throw config_error("interior_grid: need a < b, count >= 1");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i)
    g[i] = a + (b - a) * (static_cast<double>(i) + 1.0) / (count + 1.0);
  return g;
}

}  // namespace hardylab
