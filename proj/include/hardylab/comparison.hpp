#pragma once

#include <span>
#include <vector>

#include "hardylab/ext_real.hpp"

namespace hardylab {

// Curvature comparison functions: s_lam and c_lam solve f'' + lam f = 0 with
// (s(0), s'(0)) = (0, 1) and (c(0), c'(0)) = (1, 0), i.e. the sin/linear/sinh
// and cos/const/cosh branches. They obey
//   s' = c,   c' = -lam s,   lam s^2 + c^2 = 1.
double s_lambda(double lambda, double t);
double c_lambda(double lambda, double t);

// First derivative helpers (exact, via the ODE relations).
double ds_lambda(double lambda, double t);  // = c_lambda
double dc_lambda(double lambda, double t);  // = -lambda * s_lambda

// Half the first zero spacing of s_lam: pi/(2 sqrt(lam)) for lam > 0, else +inf.
ExtReal r_lambda(double lambda);

// For lam > 0 the functions are used on [0, 2 r_lam); the right endpoint is
// excluded. For lam <= 0 every t >= 0 is in range.
bool in_domain(double lambda, double t);

struct ComparisonBasis {
  double lambda = 0.0;

  double s(double t) const { return s_lambda(lambda, t); }
  double c(double t) const { return c_lambda(lambda, t); }
  double ds(double t) const { return ds_lambda(lambda, t); }
  double dc(double t) const { return dc_lambda(lambda, t); }
  ExtReal half_period() const { return r_lambda(lambda); }
};

// Componentwise-ordered pair (lambda, kappa): curvature bound and
// mean-curvature bound.
struct CurvaturePair {
  double lambda = 0.0;
  double kappa = 0.0;

  friend bool leq(const CurvaturePair& a, const CurvaturePair& b) {
    return a.lambda <= b.lambda && a.kappa <= b.kappa;
  }
};

// First positive zero of c_lam - kappa s_lam (closed-form, six cases).
ExtReal first_zero(const CurvaturePair& pair);

// Independent root via bisection on c_lam - kappa s_lam; used to cross-check
// the closed-form table. Returns infinity when no sign change exists below
// the 2 r_lam horizon (lam > 0) or below `search_cap` (lam <= 0).
ExtReal first_zero_bisection(const CurvaturePair& pair, double search_cap = 1e6);

// Validity horizon of the radial model: first_zero for n > 0, 2 r_lam for n = 0.
ExtReal t_horizon(int n, const CurvaturePair& pair);

struct GProfile {
  int m = 2;  // ambient dimension, >= 2
  int n = 0;  // submanifold dimension, in [0, m-1]
  CurvaturePair pair;

  ExtReal domain_end() const { return t_horizon(n, pair); }
};

// Model Laplacian of the distance from the submanifold:
//   G(t) = -n (lam s + kap c)/(c - kap s) + (m-n-1) c/s     (n > 0)
//   G(t) = (m-1) c/s                                        (n = 0)
// valid on (0, t_horizon). Near t = 0, G(t) = (m-n-1)/t - n kap + O(t); no
// regularization is applied here.
double g_value(const GProfile& profile, double t);

struct MonotoneCheck {
  bool ok = false;
  double worst_margin = 0.0;  // min over grid of G_lower(t) - G_upper(t)
};

// Checks G_{upper}(t) <= G_{lower}(t) on the grid (G decreasing in (lam, kap));
// requires leq(lower, upper) and grid inside (0, t_horizon(upper)).
MonotoneCheck check_g_monotone(int m, int n, const CurvaturePair& lower,
                               const CurvaturePair& upper, std::span<const double> grid);

struct LagrangeBound {
  double lhs = 0.0;  // sum_i (c - kap_i s)'(t)/(c - kap_i s)(t)
  double rhs = 0.0;  // n (c - kbar s)'(t)/(c - kbar s)(t), kbar = mean kap_i
};

// Requires 0 < t < min_i first_zero(lambda, kappa_i); contract lhs <= rhs with
// equality iff all kappa_i coincide.
LagrangeBound lagrange_sum_bound(double lambda, std::span<const double> kappas, double t);

// Inverse of s_lambda on its increasing branch [0, r_lambda].
double s_lambda_inverse(double lambda, double sigma);

// log s_lambda(t), log c_lambda(t), log(c_lambda(t) - K s_lambda(t)),
// computed stably for large hyperbolic arguments where the plain values
// overflow (requires the argument of each log to be positive).
double log_s_lambda(double lambda, double t);
double log_c_lambda(double lambda, double t);
double log_c_minus_ks(double lambda, double K, double t);

// Uniform grid of `count` points strictly inside (a, b).
std::vector<double> interior_grid(double a, double b, int count);

}  // namespace hardylab
