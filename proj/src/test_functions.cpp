#include "hardylab/test_functions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hardylab {

namespace {

// Integrability check of density(t) * detA(t) at one end of the domain.
SlopeClass end_integrability(const ModelGeometry& geom,
                             const std::function<double(double)>& density, double lo,
                             double hi, bool left_end, const QuadOptions& opts) {
  Integrand f;
  f.f = [&](double t) { return density(t) * radial_jacobian(geom, t); };
  return left_end ? log_slope_divergence_test(f, lo, hi, opts)
                  : log_slope_divergence_test_right(f, lo, hi, opts);
}

}  // namespace

RadialTestFunction make_nu_epsilon(const WeightPair& pair, const ModelGeometry& geom,
                                   const DomainSpec& dom, NuVariant variant,
                                   double epsilon, double s0, const QuadOptions& opts) {
  dom.validate(geom);
  if (!(epsilon > 0.0)) throw config_error("nu_epsilon: need epsilon > 0");
  const double t_hi_full = std::min(pair.t_end(), dom.t_max).value_or(opts.t_max_cap);
  if (!(s0 > dom.t_min) || !(s0 < t_hi_full))
    throw config_error("nu_epsilon: s0 must lie strictly inside the domain");

  const double p = pair.p();
  const double c_eps = (1.0 + epsilon) / p;
  const double c_half = (1.0 + 0.5 * epsilon) / p;
  // Inner region exponent per variant; outer region gets the other sign.
  const double q_in = variant == NuVariant::increasing ? c_eps : -c_half;
  const double q_out = variant == NuVariant::increasing ? -c_half : c_eps;

  // Integrability preconditions (the conditions behind the inverse
  // inequality): psi^{+-(1+eps)} w_den integrable near each end.
  {
    const double e_in = variant == NuVariant::increasing ? 1.0 + epsilon : -(1.0 + epsilon);
    const double e_out = -e_in;
    auto density_in = [&](double t) {
      return std::exp(e_in * pair.log_psi(t) + pair.log_w_den(t));
    };
    auto density_out = [&](double t) {
      return std::exp(e_out * pair.log_psi(t) + pair.log_w_den(t));
    };
    if (end_integrability(geom, density_in, dom.t_min, s0, true, opts) ==
        SlopeClass::divergent) {
      throw config_error(
          "nu_epsilon: psi^{+-(1+eps)} w_den not integrable near the submanifold "
          "(inner integrability condition fails)");
    }
    if (dom.t_max.finite() &&
        end_integrability(geom, density_out, s0, 0.999 * dom.t_max.value(), false,
                          opts) == SlopeClass::divergent) {
      throw config_error(
          "nu_epsilon: psi^{-+(1+eps)} w_den not integrable toward the far end "
          "(outer integrability condition fails)");
    }
    if (dom.t_max.is_infinite()) {
      // Truncation is harmless when the outer density decays, but a growing
      // density means the family is inadmissible outright (the capped
      // boundary family is the sharpness route then).
      double prev = 0.0;
      bool growing = false;
      double T = std::max(2.0 * s0, 1.0);
      for (int k = 0; k < 6; ++k) {
        Integrand shell;
        shell.f = [&](double t) {
          return density_out(t) * radial_jacobian(geom, t);
        };
        const double v = std::abs(integrate(shell, T, 2.0 * T, opts).value);
        if (k >= 2 && v > 4.0 * prev) growing = true;
        prev = v;
        T *= 2.0;
        if (2.0 * T > opts.t_max_cap) break;
      }
      if (growing)
        throw config_error(
            "nu_epsilon: psi^{-+(1+eps)} w_den grows toward infinity; the family is "
            "inadmissible on this unbounded domain (outer integrability condition "
            "fails)");
    }
  }

  const double log_psi0 = pair.log_psi(s0);
  const int psi_sign = pair.psi_monotone();

  RadialTestFunction u;
  u.repr = RadialTestFunction::Repr::closed_form;
  u.support_lo = dom.t_min;
  u.support_hi = t_hi_full;
  u.truncated = dom.t_max.is_infinite();
  u.kinks = {s0};
  {
    std::ostringstream os;
    os << "nu_eps(" << (variant == NuVariant::increasing ? "increasing" : "decreasing")
       << ", eps=" << epsilon << ", s0=" << s0 << ")";
    u.label = os.str();
  }
  u.value = [pair, s0, q_in, q_out, log_psi0](double t) {
    const double q = t < s0 ? q_in : q_out;
    return std::exp(q * (pair.log_psi(t) - log_psi0));
  };
  u.deriv = [pair, s0, q_in, q_out, log_psi0, psi_sign](double t) {
    const double q = t < s0 ? q_in : q_out;
    const double lg = q * (pair.log_psi(t) - log_psi0) + pair.log_abs_dpsi(t) -
                      pair.log_psi(t);
    return q * psi_sign * std::exp(lg);
  };
  u.log_abs_value = [pair, s0, q_in, q_out, log_psi0](double t) {
    const double q = t < s0 ? q_in : q_out;
    return q * (pair.log_psi(t) - log_psi0);
  };
  u.log_abs_deriv = [pair, s0, q_in, q_out, log_psi0](double t) {
    const double q = t < s0 ? q_in : q_out;
    return std::log(std::abs(q)) + q * (pair.log_psi(t) - log_psi0) +
           pair.log_abs_dpsi(t) - pair.log_psi(t);
  };
  return u;
}

RadialTestFunction truncated_boundary_family(const WeightPair& pair,
                                             const ModelGeometry& geom,
                                             const DomainSpec& dom, double epsilon,
                                             double iota, const QuadOptions& opts) {
  dom.validate(geom);
  if (dom.t_min != 0.0)
    throw config_error("truncated_boundary_family: the submanifold must be reachable "
                       "(t_min = 0)");
  const double t_hi = std::min(pair.t_end(), dom.t_max).value_or(opts.t_max_cap);
  if (!(epsilon > 0.0 && epsilon < iota && 2.0 * iota < t_hi))
    throw config_error("truncated_boundary_family: need 0 < eps < iota and 2 iota "
                       "inside the domain");

  // Sharpness route of the capped family: phi^{p-1} |(log psi)'| must fail to
  // be integrable at the submanifold.
  {
    Integrand f;
    f.f = [&](double t) {
      const double log_phi_pm1 =
          (pair.p() - 1.0) * std::log(pair.phi(t));
      const double log_dlogpsi = pair.log_abs_dpsi(t) - pair.log_psi(t);
      return std::exp(log_phi_pm1 + log_dlogpsi) * radial_jacobian(geom, t);
    };
    if (log_slope_divergence_test(f, 0.0, iota, opts) != SlopeClass::divergent)
      throw config_error(
          "truncated_boundary_family: phi^{p-1}|grad log psi| is integrable near the "
          "submanifold; the capped-family sharpness route is inapplicable");
  }

  const double p = pair.p();
  const double cap = std::exp(-pair.log_psi(epsilon) / p);

  RadialTestFunction u;
  u.repr = RadialTestFunction::Repr::closed_form;
  u.support_lo = 0.0;
  u.support_hi = 2.0 * iota;
  u.kinks = {epsilon, iota, 2.0 * iota};
  {
    std::ostringstream os;
    os << "capped_inverse_power(eps=" << epsilon << ", iota=" << iota << ")";
    u.label = os.str();
  }
  // Smoothstep cutoff eta on [iota, 2 iota].
  auto eta = [iota](double t) {
    const double x = (t - iota) / iota;
    return 1.0 - x * x * (3.0 - 2.0 * x);
  };
  auto deta = [iota](double t) {
    const double x = (t - iota) / iota;
    return -6.0 * x * (1.0 - x) / iota;
  };
  u.value = [pair, epsilon, iota, cap, p, eta](double t) {
    if (t <= epsilon) return cap;
    if (t >= 2.0 * iota) return 0.0;
    const double v = std::exp(-pair.log_psi(t) / p);
    return t <= iota ? v : v * eta(t);
  };
  u.deriv = [pair, epsilon, iota, p, eta, deta](double t) {
    if (t <= epsilon || t >= 2.0 * iota) return 0.0;
    const double lv = -pair.log_psi(t) / p;
    const double dv = -(pair.psi_monotone() / p) *
                      std::exp(lv + pair.log_abs_dpsi(t) - pair.log_psi(t));
    if (t <= iota) return dv;
    return dv * eta(t) + std::exp(lv) * deta(t);
  };
  const double neg_inf = -std::numeric_limits<double>::infinity();
  u.log_abs_value = [pair, epsilon, iota, p, eta, cap, neg_inf](double t) {
    if (t <= epsilon) return std::log(cap);
    if (t >= 2.0 * iota) return neg_inf;
    const double lv = -pair.log_psi(t) / p;
    return t <= iota ? lv : lv + std::log(eta(t));
  };
  // On the cutoff band both contributions share a sign (v and eta both
  // decrease), so log|u'| is a clean log-sum-exp.
  u.log_abs_deriv = [pair, epsilon, iota, p, eta, deta, neg_inf](double t) {
    if (t <= epsilon || t >= 2.0 * iota) return neg_inf;
    const double lv = -pair.log_psi(t) / p;
    const double ldv =
        -std::log(p) + lv + pair.log_abs_dpsi(t) - pair.log_psi(t);
    if (t <= iota) return ldv;
    const double a = ldv + std::log(eta(t));
    const double b = lv + std::log(std::abs(deta(t)));
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
  };
  return u;
}

RadialTestFunction bump(double center, double width, double amplitude) {
  if (!(width > 0.0)) throw config_error("bump: need width > 0");
  RadialTestFunction u;
  u.repr = RadialTestFunction::Repr::bump_sum;
  u.support_lo = center - width;
  u.support_hi = center + width;
  {
    std::ostringstream os;
    os << "bump(c=" << center << ", w=" << width << ", a=" << amplitude << ")";
    u.label = os.str();
  }
  u.value = [center, width, amplitude](double t) {
    const double x = (t - center) / width;
    if (std::abs(x) >= 1.0) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - x * x));
  };
  u.deriv = [center, width, amplitude](double t) {
    const double x = (t - center) / width;
    if (std::abs(x) >= 1.0) return 0.0;
    const double onemx2 = 1.0 - x * x;
    return amplitude * std::exp(-1.0 / onemx2) * (-2.0 * x / (onemx2 * onemx2)) / width;
  };
  return u;
}

RadialTestFunction random_bump_sum(std::mt19937_64& rng, double lo, double hi,
                                   int max_bumps) {
  if (!(lo < hi)) throw config_error("random_bump_sum: need lo < hi");
  const double span = hi - lo;
  std::uniform_int_distribution<int> count_d(1, max_bumps);
  std::uniform_real_distribution<double> cd(lo + 0.08 * span, hi - 0.08 * span);
  std::uniform_real_distribution<double> amp_d(0.5, 2.0);
  std::uniform_int_distribution<int> sign_d(0, 1);

  const int count = count_d(rng);
  struct B {
    double c, w, a;
  };
  std::vector<B> bumps(count);
  double s_lo = hi, s_hi = lo;
  for (auto& b : bumps) {
    b.c = cd(rng);
    const double w_max = 0.9 * std::min(b.c - lo, hi - b.c);
    std::uniform_real_distribution<double> wd(0.05 * w_max, w_max);
    b.w = wd(rng);
    b.a = amp_d(rng) * (sign_d(rng) ? 1.0 : -1.0);
    s_lo = std::min(s_lo, b.c - b.w);
    s_hi = std::max(s_hi, b.c + b.w);
  }

  RadialTestFunction u;
  u.repr = RadialTestFunction::Repr::bump_sum;
  u.support_lo = s_lo;
  u.support_hi = s_hi;
  {
    std::ostringstream os;
    os << "bump_sum(" << count << " bumps on [" << s_lo << ", " << s_hi << "])";
    u.label = os.str();
  }
  u.value = [bumps](double t) {
    double v = 0.0;
    for (const auto& b : bumps) {
      const double x = (t - b.c) / b.w;
      if (std::abs(x) < 1.0) v += b.a * std::exp(-1.0 / (1.0 - x * x));
    }
    return v;
  };
  u.deriv = [bumps](double t) {
    double v = 0.0;
    for (const auto& b : bumps) {
      const double x = (t - b.c) / b.w;
      if (std::abs(x) < 1.0) {
        const double onemx2 = 1.0 - x * x;
        v += b.a * std::exp(-1.0 / onemx2) * (-2.0 * x / (onemx2 * onemx2)) / b.w;
      }
    }
    return v;
  };
  return u;
}

}  // namespace hardylab
