#pragma once

#include <optional>

#include "hardylab/test_functions.hpp"

namespace hardylab {

enum class Verdict { verified, violated, inconclusive };

const char* to_string(Verdict v);

// One inequality instance: log-space numerator/denominator weight densities
// and the certified constant for the quotient. The general form carries
// (w_num, w_den, p^{-p}); pulled forms carry the theorem weights with the
// constant factored out.
struct DensityPair {
  std::function<double(double)> log_num;
  std::function<double(double)> log_den;
  double constant = 0.25;
  double p = 2.0;
  std::string form = "general";
};

// General form: weights of the pair itself, constant p^{-p}.
DensityPair general_form(const WeightPair& pair);

// Power-family pulled form: theorem weights c^{1-p} s^{p+beta} / (c-Ks)^n and
// c s^beta / (c-Ks)^n with constant |(beta+m-n)/p|^p.
DensityPair pulled_power_form(const WeightPair& pair);

// Log-family pulled form: [log(S/s)]^{p+beta} c^{1-p} s^alpha / (c-Ks)^n vs
// [log(S/s)]^beta c s^{alpha-p} / (c-Ks)^n with constant (s/p)^p.
DensityPair pulled_log_form(const WeightPair& pair, double s);

struct HardyReport {
  QuadResult numerator;
  QuadResult denominator;
  double quotient = 0.0;
  double sharp_constant = 0.0;
  std::optional<double> bracket_upper;
  Verdict verdict = Verdict::inconclusive;
  std::string scenario_id;
  std::string test_label;
  double slack = 0.0;  // 10 x combined relative quadrature error
};

// Rayleigh quotient of u against the densities, reduced to one dimension over
// the domain (the transverse factor cancels). Verdict: verified iff quotient
// >= constant (1 - slack).
HardyReport hardy_eval(const ModelGeometry& geom, const DomainSpec& dom,
                       const DensityPair& densities, const RadialTestFunction& u,
                       const QuadOptions& opts = {}, const std::string& scenario_id = {});

struct SweepRow {
  double epsilon = 0.0;
  HardyReport report;
  double lower = 0.0;
  double upper = 0.0;  // c(eps)^p bracket, scaled by any pulled constant
  bool in_bracket = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool sharp = false;  // all rows in-bracket with the bracket collapsing
};

// Almost-extremal sweep: for each eps the quotient must land strictly inside
// (constant, constant (1+eps)^p) up to quadrature slack.
SweepResult sharpness_sweep(const WeightPair& pair, const ModelGeometry& geom,
                            const DomainSpec& dom, const DensityPair& densities,
                            NuVariant variant, const std::vector<double>& epsilons,
                            double s0, const QuadOptions& opts = {},
                            const std::string& scenario_id = {});

// Capped-family sweep toward the constant from above (boundary route).
SweepResult boundary_sweep(const WeightPair& pair, const ModelGeometry& geom,
                           const DomainSpec& dom, const DensityPair& densities,
                           const std::vector<double>& epsilons, double iota,
                           const QuadOptions& opts = {},
                           const std::string& scenario_id = {});

// Monte-Carlo lower-bound check over random bump sums; returns the report of
// the worst (smallest-quotient) trial.
HardyReport random_testfn_oracle(const ModelGeometry& geom, const DomainSpec& dom,
                                 const DensityPair& densities, int trials,
                                 std::uint64_t seed, const QuadOptions& opts = {},
                                 const std::string& scenario_id = {});

struct ImprovedCheck {
  double lhs = 0.0;
  double first_term = 0.0;   // |delta|^p T1
  double second_term = 0.0;  // (p-1)/(2p) |delta|^{p-2} T2
  double residual = 0.0;     // lhs - first - second
  double slack = 0.0;
  bool ok = false;
};

// Remainder-term inequality on bounded tubes: evaluates
//   int |u'|^p c^{1-p} s^{p+beta}/(c-ks)^n
//     - |delta|^p int |u|^p c s^beta/(c-ks)^n
//     - (p-1)/(2p) |delta|^{p-2} int |u|^p c s^beta/(c-ks)^n log^{-2}(s(D)/s(r))
// with delta = (m-n+beta)/p, using the model's own (lambda, kappa). D must
// satisfy s(D) >= Tcal * s(sup r) for a caller-supplied Tcal > 1.
ImprovedCheck improved_inequality_check(const ModelGeometry& geom, const DomainSpec& dom,
                                        double p, double beta, double D, double Tcal,
                                        const RadialTestFunction& u,
                                        const QuadOptions& opts = {});

}  // namespace hardylab
