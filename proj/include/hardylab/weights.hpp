#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "hardylab/geometry.hpp"

namespace hardylab {

enum class WeightFamily { power, log_global, log_general };

struct PowerParams {
  double Lambda = 0.0, K = 0.0;
  double beta = -2.0;
  double p = 2.0;
  int m = 3, n = 0;
};

// psi(t) = int_0^t [log(s_L(D)/s_L(tau))]^{s1} s_L(tau)^{s2} c_L(tau) dtau,
// increasing with psi(0) = 0.
struct LogGlobalParams {
  double Lambda = 0.0, K = 0.0;
  double s1 = -2.0, s2 = -1.0;
  double D = 1.0;
  double p = 2.0;
  int m = 3, n = 0;
};

// psi(t) = int_t^L ..., decreasing with psi(L) = 0.
struct LogGeneralParams {
  double Lambda = 0.0, K = 0.0;
  double s1 = 0.0, s2 = -1.0;
  double D = 1.0, L = 1.0;
  double p = 2.0;
  int m = 3, n = 0;
};

// One (phi, psi) construction with its derived Hardy weight densities.
// phi(t) = (c_L(t) - K s_L(t))^{-n/(p-1)} s_L(t)^{-(m-n-1)/(p-1)} for every
// family; psi varies. Log-family psi values are precomputed on a graded grid
// (after the sigma = s_Lambda substitution) and interpolated with a monotone
// cubic whose accuracy is validated against direct quadrature at build time.
// Immutable and shareable across threads after construction.
class WeightPair {
 public:
  static WeightPair power(const PowerParams& params);
  static WeightPair log_global(const LogGlobalParams& params, const QuadOptions& opts = {});
  static WeightPair log_general(const LogGeneralParams& params, const QuadOptions& opts = {});

  WeightFamily family() const { return family_; }
  double p() const { return p_; }
  int m() const { return m_; }
  int n() const { return n_; }
  double Lambda() const { return Lambda_; }
  double K() const { return K_; }
  ExtReal t_end() const { return t_end_; }
  int psi_monotone() const { return psi_monotone_; }

  double phi(double t) const;
  double psi(double t) const;
  double dpsi(double t) const;

  // Hardy weight densities. w_num = phi^{p-1}|psi'| / |(log psi)'|^p, which
  // equals phi^{p-1} psi^p / |psi'|^{p-1}; w_den = phi^{p-1}|psi'|.
  double w_num(double t) const;
  double w_den(double t) const;
  double log_dpsi(double t) const;

  // Log-space forms: weights span hundreds of orders of magnitude on
  // hyperbolic models, so integrand products are composed in logs.
  double log_psi(double t) const;
  double log_abs_dpsi(double t) const;
  double log_w_num(double t) const;
  double log_w_den(double t) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }

  const PowerParams* power_params() const { return std::get_if<PowerParams>(&params_); }
  const LogGlobalParams* log_global_params() const {
    return std::get_if<LogGlobalParams>(&params_);
  }
  const LogGeneralParams* log_general_params() const {
    return std::get_if<LogGeneralParams>(&params_);
  }

  std::string describe() const;

 private:
  WeightPair() = default;
  void check_inside(double t) const;

  WeightFamily family_ = WeightFamily::power;
  std::variant<PowerParams, LogGlobalParams, LogGeneralParams> params_;
  double p_ = 2.0;
  int m_ = 3, n_ = 0;
  double Lambda_ = 0.0, K_ = 0.0;
  ExtReal t_end_;
  int psi_monotone_ = 1;
  std::vector<double> breakpoints_;
  std::shared_ptr<const class LogPsiTable> table_;  // log families with s2 != -1
};

enum class AssumptionId { A3_1, A4_1, A4_5 };
enum class ClauseStatus { verified, verified_numerically, user_asserted, failed };

const char* to_string(AssumptionId id);
const char* to_string(ClauseStatus s);

struct AuditClause {
  std::string id;
  ClauseStatus status = ClauseStatus::verified;
  std::string evidence;
};

struct AssumptionAudit {
  AssumptionId which = AssumptionId::A3_1;
  std::vector<AuditClause> clauses;
  bool pass() const {
    for (const auto& c : clauses)
      if (c.status == ClauseStatus::failed) return false;
    return true;
  }
};

// Audits the machine-checkable clauses of the structural assumptions for the
// pair on the given model and domain. Weak-divergence clauses are certified
// only through the G-comparison sufficient condition; when that fails the
// clause reports user_asserted, never failed.
AssumptionAudit audit_assumption(const WeightPair& pair, const ModelGeometry& geom,
                                 const DomainSpec& dom, AssumptionId which,
                                 const QuadOptions& opts = {});

}  // namespace hardylab
