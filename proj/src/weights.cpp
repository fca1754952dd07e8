#include "hardylab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace hardylab {

namespace {

// Fritsch-Carlson-limited cubic Hermite on ascending knots. Tangents are
// seeded with exact analytic slopes, then clamped onto the monotone region,
// so interpolation error is O(h^4) wherever the limiter is slack.
struct MonotoneCubic {
  std::vector<double> x, y, t;

  static MonotoneCubic build(std::vector<double> xs, std::vector<double> ys,
                             std::vector<double> tangents) {
    MonotoneCubic c{std::move(xs), std::move(ys), std::move(tangents)};
    for (size_t i = 0; i + 1 < c.x.size(); ++i) {
      const double h = c.x[i + 1] - c.x[i];
      const double d = (c.y[i + 1] - c.y[i]) / h;
      if (d == 0.0) {
        c.t[i] = 0.0;
        c.t[i + 1] = 0.0;
        continue;
      }
      double a = c.t[i] / d, b = c.t[i + 1] / d;
      if (a < 0.0) {
        c.t[i] = 0.0;
        a = 0.0;
      }
      if (b < 0.0) {
        c.t[i + 1] = 0.0;
        b = 0.0;
      }
      const double r = a * a + b * b;
      if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        c.t[i] = tau * a * d;
        c.t[i + 1] = tau * b * d;
      }
    }
    return c;
  }

  double operator()(double q) const {
    if (q <= x.front()) return y.front() + t.front() * (q - x.front());
    if (q >= x.back()) return y.back() + t.back() * (q - x.back());
    const auto it = std::upper_bound(x.begin(), x.end(), q);
    const size_t i = static_cast<size_t>(it - x.begin()) - 1;
    const double h = x[i + 1] - x[i];
    const double u = (q - x[i]) / h;
    const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
    const double h10 = u * (1.0 - u) * (1.0 - u);
    const double h01 = u * u * (3.0 - 2.0 * u);
    const double h11 = u * u * (u - 1.0);
    return h00 * y[i] + h10 * h * t[i] + h01 * y[i + 1] + h11 * h * t[i + 1];
  }
};

// One antiderivative branch of x^{s2} [log(S/x)]^{s1} (s2 != -1), by repeated
// integration by parts:
//   F(x) = x^{s2+1} L^{s1} / (s2+1) * sum_k prod_{j<k} (s1-j) / ((s2+1) L),
// L = log(S/x). Valid where the term ratio is small; used only below the
// table floor, which is chosen to make it converge to ~1e-12 relative.
double antideriv_series(double S, double s1, double s2, double x) {
  const double L = std::log(S / x);
  const double head = std::exp((s2 + 1.0) * std::log(x) + s1 * std::log(L)) / (s2 + 1.0);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 16; ++k) {
    term *= (s1 - (k - 1)) / ((s2 + 1.0) * L);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return head * sum;
}

double table_floor(double S, double s1, double s2) {
  const double L_series =
      std::max(40.0, 30.0 * (std::abs(s1) + 12.0) / std::max(std::abs(s2 + 1.0), 0.05));
  // sigma^{s2} must stay inside double range when cells are integrated.
  const double L_overflow = 640.0 / std::max(1.0, std::abs(s2));
  const double L_floor = std::min(L_series, L_overflow);
  return std::max(S * std::exp(-L_floor), 1e-290);
}

std::vector<double> geometric_knots(double lo, double hi, int n) {
  std::vector<double> k(n + 1);
  for (int i = 0; i <= n; ++i)
    k[i] = lo * std::pow(hi / lo, static_cast<double>(i) / n);
  k.front() = lo;
  k.back() = hi;
  return k;
}

}  // namespace

// Cached psi values for the log families with s2 != -1, tabulated in the
// substituted variable sigma = s_Lambda(t). Two geometric sections cover
// (floor, mid] and [mid, top]; below the floor the antiderivative series
// takes over; beyond the top (a few ulp below the endpoint) a linear
// extension is used, where every consumer's integrand vanishes.
class LogPsiTable {
 public:
  // from_zero: Psi(sigma) = int_0^sigma g (log_global).
  // to_anchor: Psi(sigma) = int_sigma^{anchor} g (log_general).
  LogPsiTable(double S, double s1, double s2, double anchor, bool from_zero,
              bool anchor_singular, const QuadOptions& opts, int n_cells = 2048)
      : S_(S), s1_(s1), s2_(s2), anchor_(anchor), from_zero_(from_zero) {
    const double floor_sigma = std::min(table_floor(S, s1, s2), anchor / 8.0);
    const double d_floor = anchor * 4e-16;
    const double mid = 0.5 * anchor;

    auto g = [this](double x) {
      return std::pow(std::log(S_ / x), s1_) * std::pow(x, s2_);
    };
    QuadOptions cell_opts = opts;
    cell_opts.atol = 1e-305;
    cell_opts.rtol = 1e-13;

    // Low knots geometric in L = log(S/sigma): the interpolant's curvature
    // scales like 1/L^4, so resolution follows small L rather than small
    // sigma.
    std::vector<double> low(n_cells + 1);
    {
      const double L_hi = std::log(S / floor_sigma);
      const double L_lo = std::log(S / mid);
      for (int i = 0; i <= n_cells; ++i) {
        const double L = L_hi * std::pow(L_lo / L_hi, static_cast<double>(i) / n_cells);
        low[static_cast<size_t>(i)] = S * std::exp(-L);
      }
      low.front() = floor_sigma;
      low.back() = mid;
    }
    // High section knots ascend in sigma = anchor - d, d descending.
    std::vector<double> dk = geometric_knots(d_floor, mid, n_cells);
    std::vector<double> high(dk.size());
    for (size_t i = 0; i < dk.size(); ++i) high[i] = anchor - dk[dk.size() - 1 - i];

    std::vector<double> sigma;
    sigma.reserve(low.size() + high.size());
    sigma.insert(sigma.end(), low.begin(), low.end());
    sigma.insert(sigma.end(), high.begin() + 1, high.end());
    // Knots can collide at the ulp scale near the anchor; drop duplicates.
    sigma.erase(std::unique(sigma.begin(), sigma.end()), sigma.end());
    const size_t n_low_u =
        static_cast<size_t>(std::upper_bound(sigma.begin(), sigma.end(), mid) -
                            sigma.begin());

    std::vector<double> cum(sigma.size(), 0.0);
    if (from_zero_) {
      cum[0] = antideriv_series(S_, s1_, s2_, sigma[0]);  // = int_0^{floor}
      for (size_t i = 1; i < sigma.size(); ++i)
        cum[i] = cum[i - 1] + cell(g, sigma[i - 1], sigma[i], cell_opts);
    } else {
      // Accumulate downward from the anchor sliver.
      Integrand top;
      top.f = g;
      if (anchor_singular) top.singular_right = SingularHint{s1_, 0.0, S_};
      const size_t last = sigma.size() - 1;
      cum[last] = integrate(top, sigma[last], anchor_, cell_opts).value;
      for (size_t i = last; i-- > 0;)
        cum[i] = cum[i + 1] + cell(g, sigma[i], sigma[i + 1], cell_opts);
      floor_value_ = cum[0];
    }

    // Interpolate log(Psi) against log(sigma) (low) / log(dist) (high), with
    // exact tangents d log Psi = +/- sigma g / Psi d log sigma.
    const size_t n_low = n_low_u;
    std::vector<double> xl(n_low), yl(n_low), tl(n_low);
    for (size_t i = 0; i < n_low; ++i) {
      xl[i] = std::log(sigma[i]);
      yl[i] = std::log(cum[i]);
      tl[i] = (from_zero_ ? 1.0 : -1.0) * sigma[i] * g(sigma[i]) / cum[i];
    }
    low_ = MonotoneCubic::build(std::move(xl), std::move(yl), std::move(tl));

    std::vector<double> xh, yh, th;
    xh.reserve(sigma.size() - n_low + 1);
    for (size_t i = sigma.size(); i-- > n_low - 1;) {  // descending sigma = ascending d
      const double d = anchor - sigma[i];
      if (!(d > 0.0)) continue;
      xh.push_back(std::log(d));
      yh.push_back(std::log(cum[i]));
      const double slope = -d * g(sigma[i]) / cum[i];  // dY/dX when Psi grows in sigma
      th.push_back(from_zero_ ? slope : -slope);
    }
    high_ = MonotoneCubic::build(std::move(xh), std::move(yh), std::move(th));

    floor_sigma_ = floor_sigma;
    mid_ = mid;
    top_sigma_ = sigma.back();
    top_value_ = cum.back();
    top_slope_ = g(top_sigma_);
    if (from_zero_) floor_value_ = cum[0];
  }

  double value(double sigma) const {
    if (sigma <= floor_sigma_) {
      const double piece = antideriv_series(S_, s1_, s2_, sigma);
      if (from_zero_) return piece;  // F(0+) = 0 for s2 > -1
      const double at_floor = antideriv_series(S_, s1_, s2_, floor_sigma_);
      return floor_value_ + (at_floor - piece);
    }
    if (sigma >= top_sigma_) {
      const double lin = (sigma - top_sigma_) * top_slope_;
      return from_zero_ ? top_value_ + lin : std::max(top_value_ - lin, 0.0);
    }
    if (sigma <= mid_) return std::exp(low_(std::log(sigma)));
    return std::exp(high_(std::log(anchor_ - sigma)));
  }

  double log_value(double sigma) const {
    if (sigma > floor_sigma_ && sigma < top_sigma_)
      return sigma <= mid_ ? low_(std::log(sigma)) : high_(std::log(anchor_ - sigma));
    return std::log(value(sigma));
  }

 private:
  static double cell(const std::function<double(double)>& g, double a, double b,
                     const QuadOptions& opts) {
    return integrate(g, a, b, opts).value;
  }

  double S_, s1_, s2_, anchor_;
  bool from_zero_;
  double floor_sigma_ = 0.0, mid_ = 0.0, top_sigma_ = 0.0;
  double floor_value_ = 0.0, top_value_ = 0.0, top_slope_ = 0.0;
  MonotoneCubic low_, high_;
};

namespace {

ExtReal power_validity(double Lambda, double K, int n) {
  return min(r_lambda(Lambda), t_horizon(n, {Lambda, K}));
}

void check_log_domain(double Lambda, double K, int n, double D) {
  if (!(D > 0.0) || !std::isfinite(D))
    throw config_error("log weight pair: D must be finite and positive");
  if (!(ExtReal(D) <= power_validity(Lambda, K, n)))
    throw config_error("log weight pair: D exceeds min(r_Lambda, t_{Lambda,K})");
}

// Validates the cached interpolation against direct quadrature at 50 off-grid
// points, half approaching the anchor and half approaching zero. The budget
// is 1e-9 relative, widened only by the reference's own error estimate where
// the integrand is noise-limited (log conditioning next to the anchor).
void validate_table(const LogPsiTable& table, double S, double s1, double s2,
                    double anchor, bool from_zero, bool anchor_singular) {
  auto g = [&](double x) { return std::pow(std::log(S / x), s1) * std::pow(x, s2); };
  QuadOptions tight;
  tight.rtol = 1e-11;
  tight.atol = 1e-305;
  for (int i = 0; i < 50; ++i) {
    double sigma;
    if (i < 25) {
      const double frac = std::pow(10.0, -6.0 + 5.8 * (i + 0.37) / 25.0);
      sigma = anchor * (1.0 - frac);
    } else {
      const double frac = std::pow(10.0, -8.0 + 7.6 * (i - 25 + 0.43) / 25.0);
      sigma = anchor * frac;
    }
    QuadResult direct;
    if (from_zero) {
      Integrand ig;
      ig.f = g;
      ig.singular_left = SingularHint{s2, s1, S};
      direct = integrate(ig, 0.0, sigma, tight);
    } else {
      Integrand ig;
      ig.f = g;
      if (anchor_singular) ig.singular_right = SingularHint{s1, 0.0, S};
      direct = integrate(ig, sigma, anchor, tight);
    }
    const double got = table.value(sigma);
    const double scale = std::max(std::abs(direct.value), 1e-300);
    const double tol = std::max(1e-9, 3.0 * direct.abs_error_est / scale);
    if (std::abs(got - direct.value) > tol * scale) {
      std::ostringstream os;
      os << "log weight pair: psi interpolation failed its 1e-9 validation against "
            "direct quadrature (sigma=" << sigma << ", interp=" << got
         << ", direct=" << direct.value
         << ", rel=" << std::abs(got - direct.value) / scale << ")";
      throw numerical_error(os.str());
    }
  }
}

// Builds the table at the base grid size and escalates until the validation
// budget holds.
std::shared_ptr<LogPsiTable> make_validated_table(double S, double s1, double s2,
                                                  double anchor, bool from_zero,
                                                  bool anchor_singular,
                                                  const QuadOptions& opts) {
  std::string last_error;
  for (int n_cells : {2048, 4096, 8192, 16384}) {
    auto table = std::make_shared<LogPsiTable>(S, s1, s2, anchor, from_zero,
                                               anchor_singular, opts, n_cells);
    try {
      validate_table(*table, S, s1, s2, anchor, from_zero, anchor_singular);
      return table;
    } catch (const numerical_error& e) {
      last_error = e.what();
    }
  }
  throw numerical_error(last_error);
}

}  // namespace

WeightPair WeightPair::power(const PowerParams& params) {
  if (params.p <= 1.0) throw config_error("weight pair: need p > 1");
  if (params.m < 2 || params.n < 0 || params.n > params.m - 1)
    throw config_error("weight pair: need m >= 2, 0 <= n <= m-1");
  const double alpha = params.beta + params.m - params.n;
  if (std::abs(alpha) < 1e-6)
    throw config_error("power pair: psi constant (beta + m - n ~ 0)");
  WeightPair w;
  w.family_ = WeightFamily::power;
  w.params_ = params;
  w.p_ = params.p;
  w.m_ = params.m;
  w.n_ = params.n;
  w.Lambda_ = params.Lambda;
  w.K_ = params.K;
  w.t_end_ = power_validity(params.Lambda, params.K, params.n);
  w.psi_monotone_ = alpha > 0.0 ? 1 : -1;
  return w;
}

WeightPair WeightPair::log_global(const LogGlobalParams& params, const QuadOptions& opts) {
  if (params.p <= 1.0) throw config_error("weight pair: need p > 1");
  if (params.m < 2 || params.n < 0 || params.n > params.m - 1)
    throw config_error("weight pair: need m >= 2, 0 <= n <= m-1");
  check_log_domain(params.Lambda, params.K, params.n, params.D);
  if (!(params.s2 > -1.0 || (params.s2 == -1.0 && params.s1 < -1.0))) {
    std::ostringstream os;
    os << "log_global pair: H1 diverges (need s2 > -1, or s2 = -1 with s1 < -1; got s1="
       << params.s1 << ", s2=" << params.s2 << ")";
    throw config_error(os.str());
  }
  WeightPair w;
  w.family_ = WeightFamily::log_global;
  w.params_ = params;
  w.p_ = params.p;
  w.m_ = params.m;
  w.n_ = params.n;
  w.Lambda_ = params.Lambda;
  w.K_ = params.K;
  w.t_end_ = params.D;
  w.psi_monotone_ = 1;
  if (params.s2 != -1.0) {
    const double S = s_lambda(params.Lambda, params.D);
    w.table_ = make_validated_table(S, params.s1, params.s2, S, true, false, opts);
  }
  return w;
}

WeightPair WeightPair::log_general(const LogGeneralParams& params, const QuadOptions& opts) {
  if (params.p <= 1.0) throw config_error("weight pair: need p > 1");
  if (params.m < 2 || params.n < 0 || params.n > params.m - 1)
    throw config_error("weight pair: need m >= 2, 0 <= n <= m-1");
  check_log_domain(params.Lambda, params.K, params.n, params.D);
  if (!(params.L > 0.0 && params.L <= params.D))
    throw config_error("log_general pair: need L in (0, D]");
  if (params.L == params.D && !(params.s1 > -1.0))
    throw config_error("log_general pair: L = D requires s1 > -1 (divergent at D otherwise)");
  WeightPair w;
  w.family_ = WeightFamily::log_general;
  w.params_ = params;
  w.p_ = params.p;
  w.m_ = params.m;
  w.n_ = params.n;
  w.Lambda_ = params.Lambda;
  w.K_ = params.K;
  w.t_end_ = params.L;
  w.psi_monotone_ = -1;
  if (params.s2 != -1.0) {
    const double S = s_lambda(params.Lambda, params.D);
    const double anchor = s_lambda(params.Lambda, params.L);
    const bool anchor_singular = (params.L == params.D);
    w.table_ = make_validated_table(S, params.s1, params.s2, anchor, false,
                                    anchor_singular, opts);
  }
  return w;
}

void WeightPair::check_inside(double t) const {
  if (!(t > 0.0) || !(ExtReal(t) < t_end_))
    throw std::domain_error("weight pair: t outside (0, t_end)");
}

double WeightPair::phi(double t) const {
  check_inside(t);
  const double lg = -n_ * log_c_minus_ks(Lambda_, K_, t) -
                    (m_ - n_ - 1) * log_s_lambda(Lambda_, t);
  return std::exp(lg / (p_ - 1.0));
}

double WeightPair::psi(double t) const {
  check_inside(t);
  const double sig = s_lambda(Lambda_, t);
  if (family_ == WeightFamily::power) {
    const auto& pp = std::get<PowerParams>(params_);
    return std::pow(sig, pp.beta + pp.m - pp.n);
  }
  if (family_ == WeightFamily::log_global) {
    const auto& lp = std::get<LogGlobalParams>(params_);
    if (lp.s2 == -1.0) {
      const double S = s_lambda(Lambda_, lp.D);
      // int_0^sigma [log(S/x)]^{s1} / x dx, s1 < -1.
      return std::pow(std::log(S / sig), lp.s1 + 1.0) / -(lp.s1 + 1.0);
    }
    return table_->value(sig);
  }
  const auto& gp = std::get<LogGeneralParams>(params_);
  if (gp.s2 == -1.0) {
    const double S = s_lambda(Lambda_, gp.D);
    const double sigL = s_lambda(Lambda_, gp.L);
    const double u = std::log(S / sig);
    if (gp.L == gp.D) return std::pow(u, gp.s1 + 1.0) / (gp.s1 + 1.0);
    const double uL = std::log(S / sigL);
    if (gp.s1 == -1.0) return std::log(u / uL);
    return (std::pow(u, gp.s1 + 1.0) - std::pow(uL, gp.s1 + 1.0)) / (gp.s1 + 1.0);
  }
  return table_->value(sig);
}

double WeightPair::dpsi(double t) const {
  check_inside(t);
  const double sig = s_lambda(Lambda_, t);
  const double c = c_lambda(Lambda_, t);
  if (family_ == WeightFamily::power) {
    const auto& pp = std::get<PowerParams>(params_);
    const double alpha = pp.beta + pp.m - pp.n;
    return alpha * std::pow(sig, alpha - 1.0) * c;
  }
  double S, s1, s2, sign;
  if (family_ == WeightFamily::log_global) {
    const auto& lp = std::get<LogGlobalParams>(params_);
    S = s_lambda(Lambda_, lp.D);
    s1 = lp.s1;
    s2 = lp.s2;
    sign = 1.0;
  } else {
    const auto& gp = std::get<LogGeneralParams>(params_);
    S = s_lambda(Lambda_, gp.D);
    s1 = gp.s1;
    s2 = gp.s2;
    sign = -1.0;
  }
  return sign * std::pow(std::log(S / sig), s1) * std::pow(sig, s2) * c;
}

double WeightPair::log_psi(double t) const {
  check_inside(t);
  const double sig = s_lambda(Lambda_, t);
  if (family_ == WeightFamily::power) {
    const auto& pp = std::get<PowerParams>(params_);
    return (pp.beta + pp.m - pp.n) * log_s_lambda(Lambda_, t);
  }
  if (family_ == WeightFamily::log_global) {
    const auto& lp = std::get<LogGlobalParams>(params_);
    if (lp.s2 == -1.0) {
      const double S = s_lambda(Lambda_, lp.D);
      return (lp.s1 + 1.0) * std::log(std::log(S / sig)) - std::log(-(lp.s1 + 1.0));
    }
    return table_->log_value(sig);
  }
  const auto& gp = std::get<LogGeneralParams>(params_);
  if (gp.s2 == -1.0) return std::log(psi(t));
  return table_->log_value(sig);
}

double WeightPair::log_abs_dpsi(double t) const {
  check_inside(t);
  const double sig = s_lambda(Lambda_, t);
  const double c = c_lambda(Lambda_, t);
  if (family_ == WeightFamily::power) {
    const auto& pp = std::get<PowerParams>(params_);
    const double alpha = pp.beta + pp.m - pp.n;
    return std::log(std::abs(alpha)) + (alpha - 1.0) * log_s_lambda(Lambda_, t) +
           log_c_lambda(Lambda_, t);
  }
  double S, s1, s2;
  if (family_ == WeightFamily::log_global) {
    const auto& lp = std::get<LogGlobalParams>(params_);
    S = s_lambda(Lambda_, lp.D);
    s1 = lp.s1;
    s2 = lp.s2;
  } else {
    const auto& gp = std::get<LogGeneralParams>(params_);
    S = s_lambda(Lambda_, gp.D);
    s1 = gp.s1;
    s2 = gp.s2;
  }
  return s1 * std::log(std::log(S / sig)) + s2 * std::log(sig) + std::log(c);
}

namespace {
double log_phi_pow_pm1(double Lambda, double K, int m, int n, double t) {
  return -n * log_c_minus_ks(Lambda, K, t) - (m - n - 1) * log_s_lambda(Lambda, t);
}
}  // namespace

double WeightPair::log_w_den(double t) const {
  check_inside(t);
  return log_phi_pow_pm1(Lambda_, K_, m_, n_, t) + log_abs_dpsi(t);
}

double WeightPair::log_w_num(double t) const {
  check_inside(t);
  return log_phi_pow_pm1(Lambda_, K_, m_, n_, t) + p_ * log_psi(t) -
         (p_ - 1.0) * log_abs_dpsi(t);
}

double WeightPair::w_den(double t) const { return std::exp(log_w_den(t)); }

double WeightPair::w_num(double t) const { return std::exp(log_w_num(t)); }

double WeightPair::log_dpsi(double t) const {
  return psi_monotone_ * std::exp(log_abs_dpsi(t) - log_psi(t));
}

std::string WeightPair::describe() const {
  std::ostringstream os;
  switch (family_) {
    case WeightFamily::power: {
      const auto& pp = std::get<PowerParams>(params_);
      os << "power(Lambda=" << pp.Lambda << ", K=" << pp.K << ", beta=" << pp.beta
         << ", p=" << pp.p << ", m=" << pp.m << ", n=" << pp.n << ")";
      break;
    }
    case WeightFamily::log_global: {
      const auto& lp = std::get<LogGlobalParams>(params_);
      os << "log_global(Lambda=" << lp.Lambda << ", K=" << lp.K << ", s1=" << lp.s1
         << ", s2=" << lp.s2 << ", D=" << lp.D << ", p=" << lp.p << ", m=" << lp.m
         << ", n=" << lp.n << ")";
      break;
    }
    case WeightFamily::log_general: {
      const auto& gp = std::get<LogGeneralParams>(params_);
      os << "log_general(Lambda=" << gp.Lambda << ", K=" << gp.K << ", s1=" << gp.s1
         << ", s2=" << gp.s2 << ", D=" << gp.D << ", L=" << gp.L << ", p=" << gp.p
         << ", m=" << gp.m << ", n=" << gp.n << ")";
      break;
    }
  }
  return os.str();
}

const char* to_string(AssumptionId id) {
  switch (id) {
    case AssumptionId::A3_1: return "A3_1";
    case AssumptionId::A4_1: return "A4_1";
    case AssumptionId::A4_5: return "A4_5";
  }
  return "?";
}

const char* to_string(ClauseStatus s) {
  switch (s) {
    case ClauseStatus::verified: return "verified";
    case ClauseStatus::verified_numerically: return "verified_numerically";
    case ClauseStatus::user_asserted: return "user_asserted";
    case ClauseStatus::failed: return "failed";
  }
  return "?";
}

namespace {

struct AuditContext {
  const WeightPair& pair;
  const ModelGeometry& geom;
  const DomainSpec& dom;
  const QuadOptions& opts;
  double lo, hi;  // working interval strictly inside validity
};

// Does psi(0+) extend continuously (finite limit)?
bool psi_extends_to_zero(const WeightPair& pair) {
  switch (pair.family()) {
    case WeightFamily::power:
      return pair.power_params()->beta + pair.m() - pair.n() > 0.0;
    case WeightFamily::log_global:
      return true;  // psi(0) = 0 by construction
    case WeightFamily::log_general:
      return pair.log_general_params()->s2 > -1.0;
  }
  return false;
}

AuditClause check_monotone(const AuditContext& ctx) {
  int sign = 0;
  bool ok = true;
  for (double t : interior_grid(ctx.lo, ctx.hi, 1000)) {
    const double d = ctx.pair.dpsi(t);
    if (!std::isfinite(d) || d == 0.0) {
      ok = false;
      break;
    }
    const int s = d > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) {
      ok = false;
      break;
    }
  }
  return {"psi-monotone", ok ? ClauseStatus::verified_numerically : ClauseStatus::failed,
          ok ? "psi' keeps one sign on a 1000-point grid" : "psi' changes sign or blows up"};
}

// Weak divergence of sgn(psi') phi^{p-1} grad r via the G-comparison
// sufficient condition: sgn(psi') (G_model - G_{Lambda,K}) >= 0.
AuditClause check_divergence(const AuditContext& ctx) {
  const GProfile pair_profile{ctx.pair.m(), ctx.pair.n(),
                              {ctx.pair.Lambda(), ctx.pair.K()}};
  double worst = std::numeric_limits<double>::infinity();
  const double sgn = ctx.pair.psi_monotone() > 0 ? 1.0 : -1.0;
  for (double t : interior_grid(ctx.lo, ctx.hi, 1000)) {
    const double margin =
        sgn * (dlog_radial_jacobian(ctx.geom, t) - g_value(pair_profile, t));
    worst = std::min(worst, margin);
  }
  std::ostringstream os;
  os << "sgn(psi') (G_model - G_pair) worst margin " << worst << " on 1000-point grid";
  if (worst >= -1e-9)
    return {"weak-divergence", ClauseStatus::verified_numerically, os.str()};
  os << "; G-comparison sufficient condition failed, weak divergence needs user assertion";
  return {"weak-divergence", ClauseStatus::user_asserted, os.str()};
}

// Local integrability near the submanifold of density(t) * detA(t).
AuditClause integrability_near_zero(const AuditContext& ctx, const std::string& label,
                                    const std::function<double(double)>& density) {
  Integrand f;
  f.f = [&](double t) { return density(t) * radial_jacobian(ctx.geom, t); };
  const SlopeClass c =
      log_slope_divergence_test(f, 0.0, std::min(ctx.hi, 1.0), ctx.opts);
  switch (c) {
    case SlopeClass::convergent:
      return {label, ClauseStatus::verified_numerically,
              "log-slope classifier: convergent near t = 0"};
    case SlopeClass::divergent:
      return {label, ClauseStatus::failed, "log-slope classifier: divergent near t = 0"};
    case SlopeClass::inconclusive:
      break;
  }
  return {label, ClauseStatus::user_asserted,
          "log-slope classifier inconclusive near t = 0"};
}

AuditClause negligible_zero_set() {
  return {"negligible-zero-set", ClauseStatus::verified,
          "family zero sets are isolated points"};
}

// When the far end of the radial interval is an interior set of the domain
// (full space, or the hemisphere pole), local integrability must also hold
// there; a divergent far end is the flat-cylinder failure mode.
std::optional<AuditClause> far_end_integrability(const AuditContext& ctx) {
  if (ctx.dom.kind != DomainKind::full_space &&
      ctx.dom.kind != DomainKind::hemisphere_boundary)
    return std::nullopt;
  if (!ctx.dom.t_max.finite()) return std::nullopt;
  const double end = ctx.dom.t_max.value();
  const char* names[2] = {"w_den", "w_num"};
  const std::function<double(double)> densities[2] = {
      [&](double t) { return ctx.pair.w_den(t); },
      [&](double t) { return ctx.pair.w_num(t); }};
  for (int i = 0; i < 2; ++i) {
    Integrand f;
    f.f = [&, i](double t) { return densities[i](t) * radial_jacobian(ctx.geom, t); };
    const SlopeClass c =
        log_slope_divergence_test_right(f, 0.5 * end, end, ctx.opts);
    if (c == SlopeClass::divergent)
      return AuditClause{"far-end-integrability", ClauseStatus::failed,
                         std::string(names[i]) +
                             " diverges at the interior far end of the radial range"};
    if (c == SlopeClass::inconclusive)
      return AuditClause{"far-end-integrability", ClauseStatus::user_asserted,
                         "log-slope classifier inconclusive at the far end"};
  }
  return AuditClause{"far-end-integrability", ClauseStatus::verified_numerically,
                     "densities integrable at the interior far end"};
}

AuditClause interior_integrability(const AuditContext& ctx) {
  // Densities are continuous on compacts inside (0, t_end); a spot check
  // guards against construction mistakes.
  for (double t : interior_grid(ctx.lo, ctx.hi, 7)) {
    if (!std::isfinite(ctx.pair.w_num(t)) || !std::isfinite(ctx.pair.w_den(t)) ||
        !std::isfinite(ctx.pair.phi(t)))
      return {"local-integrability", ClauseStatus::failed,
              "density non-finite at an interior point"};
  }
  return {"local-integrability", ClauseStatus::verified,
          "densities continuous on interior compacts"};
}

}  // namespace

AssumptionAudit audit_assumption(const WeightPair& pair, const ModelGeometry& geom,
                                 const DomainSpec& dom, AssumptionId which,
                                 const QuadOptions& opts) {
  dom.validate(geom);
  AssumptionAudit audit;
  audit.which = which;

  // Working interval: audits are local statements; on unbounded domains a
  // moderate cap keeps hyperbolic weights inside double range.
  const double hi =
      0.999 * std::min({pair.t_end().value_or(50.0), dom.t_max.value_or(50.0),
                        geom.horizon().value_or(50.0), 50.0});
  const double lo = std::max(dom.t_min, hi * 1e-6);
  AuditContext ctx{pair, geom, dom, opts, lo, hi};

  // (a) well-definedness of the pair on the required set.
  {
    const bool on_domain = dom.t_max <= pair.t_end();
    if (which == AssumptionId::A3_1) {
      audit.clauses.push_back(
          {"well-defined", on_domain ? ClauseStatus::verified : ClauseStatus::failed,
           on_domain ? "validity interval covers the domain"
                     : "pair validity ends before t_max"});
    } else if (which == AssumptionId::A4_1) {
      const bool extends = psi_extends_to_zero(pair);
      ClauseStatus st = (on_domain && extends) ? ClauseStatus::verified
                                               : ClauseStatus::failed;
      audit.clauses.push_back(
          {"well-defined", st,
           extends ? "psi extends continuously to the submanifold"
                   : "psi(0+) is infinite; no continuous extension"});
    } else {
      const bool on_manifold = geom.horizon() <= pair.t_end();
      audit.clauses.push_back(
          {"well-defined",
           on_manifold ? ClauseStatus::verified : ClauseStatus::failed,
           on_manifold ? "validity interval covers the model horizon"
                       : "pair validity ends before the model horizon"});
    }
  }

  audit.clauses.push_back(check_monotone(ctx));

  if (which == AssumptionId::A4_1) {
    // (c) psi'(0+) finite, or infinite with psi' > 0 and phi^{p-1} psi^p
    // locally integrable up to the submanifold.
    const double d1 = std::abs(pair.dpsi(std::max(1e-5, lo)));
    const double d2 = std::abs(pair.dpsi(std::max(1e-7, lo * 1e-2)));
    const bool dpsi_finite = d2 <= 10.0 * (d1 + 1.0);
    if (dpsi_finite) {
      audit.clauses.push_back({"psi-derivative-at-zero", ClauseStatus::verified_numerically,
                               "psi'(0+) bounded"});
    } else if (pair.psi_monotone() > 0) {
      auto cl = integrability_near_zero(ctx, "psi-derivative-at-zero", [&](double t) {
        return std::pow(pair.phi(t), pair.p() - 1.0) * std::pow(pair.psi(t), pair.p());
      });
      cl.evidence = "psi'(0+) infinite; phi^{p-1} psi^p integrability: " + cl.evidence;
      audit.clauses.push_back(cl);
    } else {
      audit.clauses.push_back({"psi-derivative-at-zero", ClauseStatus::failed,
                               "psi'(0+) infinite with psi decreasing"});
    }
  }

  audit.clauses.push_back(check_divergence(ctx));

  // Integrability clause.
  if (which == AssumptionId::A3_1) {
    audit.clauses.push_back(interior_integrability(ctx));
  } else if (which == AssumptionId::A4_1) {
    const char* names[4] = {"phi^{p-1}", "phi^{p-1} psi", "w_den", "w_num"};
    const std::function<double(double)> densities[4] = {
        [&](double t) { return std::pow(pair.phi(t), pair.p() - 1.0); },
        [&](double t) { return std::pow(pair.phi(t), pair.p() - 1.0) * pair.psi(t); },
        [&](double t) { return pair.w_den(t); },
        [&](double t) { return pair.w_num(t); }};
    bool any_failed = false;
    std::string detail;
    ClauseStatus status = ClauseStatus::verified_numerically;
    for (int i = 0; i < 4; ++i) {
      auto cl = integrability_near_zero(ctx, names[i], densities[i]);
      if (cl.status == ClauseStatus::failed) {
        any_failed = true;
        detail = std::string(names[i]) + " not integrable at the submanifold";
        break;
      }
      if (cl.status == ClauseStatus::user_asserted) status = ClauseStatus::user_asserted;
    }
    audit.clauses.push_back({"local-integrability",
                             any_failed ? ClauseStatus::failed : status,
                             any_failed ? detail : "all four densities integrable near t = 0"});
  } else {
    audit.clauses.push_back(interior_integrability(ctx));
    auto cl = integrability_near_zero(ctx, "w_num-global", [&](double t) {
      return pair.w_num(t);
    });
    cl.evidence = "w_num in L^1_loc(M): " + cl.evidence;
    audit.clauses.push_back(cl);
  }

  if (auto far = far_end_integrability(ctx)) audit.clauses.push_back(*far);

  audit.clauses.push_back(negligible_zero_set());

  if (which == AssumptionId::A4_5) {
    // (f) local boundedness of d/dr log w_num, reported as a grid maximum
    // over a compact sub-interval (not a certified supremum).
    double worst = 0.0;
    for (double t : interior_grid(std::max(lo, 0.05 * hi), 0.95 * hi, 1000)) {
      const double h = 1e-6 * std::max(1.0, t);
      const double d =
          (std::log(pair.w_num(t + h)) - std::log(pair.w_num(t - h))) / (2.0 * h);
      worst = std::max(worst, std::abs(d));
    }
    std::ostringstream os;
    os << "max |d/dr log w_num| = " << worst << " on the compact grid";
    audit.clauses.push_back(
        {"log-wnum-derivative", ClauseStatus::verified_numerically, os.str()});
  }

  return audit;
}

}  // namespace hardylab
