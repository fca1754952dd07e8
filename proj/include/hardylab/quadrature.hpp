#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hardylab/ext_real.hpp"

namespace hardylab {

// Advisory description of an endpoint singularity: f(t) ~ C * d^power *
// [log(log_scale / d)]^log_power as the distance d to the endpoint goes to 0.
// Hints steer grading and tail models; a wrong hint may cost efficiency or a
// failed convergence flag, never a silently wrong converged result (tail
// models are validated against the observed shell masses before use).
struct SingularHint {
  double power = 0.0;
  double log_power = 0.0;
  double log_scale = 1.0;
};

struct Integrand {
  std::function<double(double)> f;
  std::optional<SingularHint> singular_left;
  std::optional<SingularHint> singular_right;
  std::vector<double> breakpoints;  // sorted interior split points (kinks, seams)
};

struct QuadResult {
  double value = 0.0;
  double abs_error_est = 0.0;
  int subdivisions = 0;
  bool converged = false;
  long evaluations = 0;
  // Infinite-domain handling: estimated mass beyond the truncation point and
  // whether the T_max cap was hit before the tail rule was satisfied.
  double tail_bound = 0.0;
  bool truncated_at_cap = false;
};

struct QuadOptions {
  double atol = 1e-12;
  double rtol = 1e-9;
  long max_evals = 1'000'000;
  double t_max_cap = 1e4;  // truncation cap for infinite upper limits
};

// Adaptive Gauss-Kronrod (G7/K15) integration of f over (a, b), b possibly
// infinite. Splits at declared breakpoints, grades geometrically (ratio 1/2)
// into singular endpoints before refining, and extends the grading with
// ratio- or hint-model tail estimates when the singularity decays too slowly
// for fixed-depth grading. abs_error_est sums the Kronrod-Gauss deltas plus
// any tail-model error. NaN or infinity from f raises numerical_error with
// the evaluation point; exhausting the budget returns the best estimate with
// converged = false.
QuadResult integrate(const Integrand& f, double a, ExtReal b, const QuadOptions& opts = {});

// Convenience overload for plain callables without hints or breakpoints.
QuadResult integrate(const std::function<double(double)>& f, double a, ExtReal b,
                     const QuadOptions& opts = {});

enum class SlopeClass { convergent, divergent, inconclusive };

// Classifies integrability of f at the left endpoint a by the growth of
// I(eps) = int_{a+eps}^{t0} f across eps = 1e-2 .. 1e-8. Positive (or
// negative) f only; sign changes give `inconclusive`.
SlopeClass log_slope_divergence_test(const Integrand& f, double a, double t0,
                                     const QuadOptions& opts = {});

// Mirror test at the right endpoint t1 of (t0, t1).
SlopeClass log_slope_divergence_test_right(const Integrand& f, double t0, double t1,
                                           const QuadOptions& opts = {});

struct H12Result {
  bool divergent = false;
  QuadResult quad;  // meaningful only when !divergent
};

// Finiteness evaluators of the log-weight analysis:
//   H1 = int_0^{l1}  [log(s_L(D)/s_L(tau))]^{s1} s_L(tau)^{s2} c_L(tau) dtau
//   H2 = int_{l1}^{l2} ...
// computed after the substitution sigma = s_Lambda(tau). Divergence is decided
// analytically: H1 diverges unless s2 > -1, or s2 = -1 with s1 < -1; H2
// diverges iff l2 = D and s1 <= -1. The numeric side cross-checks the
// analytic call with the log-slope classifier.
std::pair<H12Result, H12Result> h1_h2(double Lambda, double s1, double s2, double D,
                                      double l1, double l2, const QuadOptions& opts = {});

}  // namespace hardylab
