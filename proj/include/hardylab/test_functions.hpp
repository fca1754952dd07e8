#pragma once

#include <random>
#include <string>

#include "hardylab/weights.hpp"

namespace hardylab {

// Compactly supported piecewise-smooth radial profile with derivative and
// breakpoint list. Profiles on unbounded domains are truncated at the
// engine's T-cap and flagged; the quotient bracket is unaffected because the
// almost-extremal families satisfy the numerator/denominator proportionality
// regionwise.
struct RadialTestFunction {
  enum class Repr { closed_form, bump_sum, spline };
  Repr repr = Repr::bump_sum;
  double support_lo = 0.0;
  double support_hi = 1.0;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  // Optional log-magnitude forms for closed-form families whose plain values
  // underflow on wide hyperbolic domains; evaluators compose integrands in
  // log space when these are present (-inf marks a zero).
  std::function<double(double)> log_abs_value;
  std::function<double(double)> log_abs_deriv;
  std::vector<double> kinks;
  std::string label;
  bool truncated = false;
};

enum class NuVariant { increasing, decreasing };

// Piecewise power of psi with exponents c(eps) = (1+eps)/p and -c(eps/2),
// glued at s0 where it equals 1. The increasing variant expects psi
// increasing (integrability of psi^{1+eps} w_den near the submanifold), the
// decreasing variant the mirrored conditions; both are checked with the
// log-slope classifier before construction.
RadialTestFunction make_nu_epsilon(const WeightPair& pair, const ModelGeometry& geom,
                                   const DomainSpec& dom, NuVariant variant,
                                   double epsilon, double s0,
                                   const QuadOptions& opts = {});

// Capped inverse power eta * psi^{-1/p}: constant on [0, eps], psi^{-1/p} on
// [eps, iota], smooth cutoff to zero on [iota, 2 iota]. Requires the
// non-integrability of phi^{p-1} |(log psi)'| at the submanifold (checked);
// quotients approach p^{-p} as eps -> 0.
RadialTestFunction truncated_boundary_family(const WeightPair& pair,
                                             const ModelGeometry& geom,
                                             const DomainSpec& dom, double epsilon,
                                             double iota, const QuadOptions& opts = {});

// Smooth bump amplitude * exp(-1/(1 - x^2)), x = (t - center)/width.
RadialTestFunction bump(double center, double width, double amplitude = 1.0);

// Sum of 1..max_bumps random bumps supported strictly inside (lo, hi).
RadialTestFunction random_bump_sum(std::mt19937_64& rng, double lo, double hi,
                                   int max_bumps = 5);

}  // namespace hardylab
