#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "hardylab/minimize.hpp"
#include "hardylab/report.hpp"

namespace hardylab {

enum class TheoremId { T3_4, T4_4, T4_12, T5_2, T5_10, T6_3, T6_9, R5_6 };
enum class ActionId { audit, verify, sweep, minimize, oracle };

const char* to_string(TheoremId id);
const char* to_string(ActionId id);

struct SweepConfig {
  std::vector<double> epsilons = {0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  double s0 = 0.0;  // 0: default to the domain midpoint in the s_Lambda variable
  bool boundary_family = false;
  double iota = 0.0;  // 0: default to a quarter of the working interval
};

struct MinimizeWindow {
  std::vector<int> dofs = {8, 16, 32, 64};
  double a = 0.0, b = 0.0;  // 0,0: derived from the domain
  MinimizeConstraint constraint = MinimizeConstraint::vanish_both_ends;
};

struct OracleConfig {
  int trials = 100;
};

struct ImprovedConfig {
  double D = 0.0;
  double Tcal = 10.0;
  int trials = 50;
};

// One verification scenario: geometry, domain, curvature condition, weight
// family, exponent p, target theorem, and the actions to run.
struct Scenario {
  std::string name;
  ModelGeometry geometry;
  DomainSpec domain;
  CurvatureCondition condition;
  WeightFamily family = WeightFamily::power;
  PowerParams power;
  LogGlobalParams log_global;
  LogGeneralParams log_general;
  double log_s = 1.0;  // the s of the (s/p)^p log-weight constant
  TheoremId theorem = TheoremId::T3_4;
  std::vector<ActionId> actions = {ActionId::audit, ActionId::verify, ActionId::oracle};
  SweepConfig sweep;
  MinimizeWindow minimize;
  OracleConfig oracle;
  ImprovedConfig improved;
  QuadOptions quad;
  std::uint64_t seed = 42;
  bool expect_audit_failure = false;
  // Testing hook: scales the certified constant (a value > 1 must trip the
  // violation exit path; never used by presets).
  double constant_scale = 1.0;

  double p() const;
  // Theorem-specific parameter constraints; throws config_error on violation.
  void validate() const;
  WeightPair make_pair() const;
  // Certified densities + constant for the theorem (pulled when applicable).
  DensityPair densities() const;
  NuVariant nu_variant() const;
  AssumptionId assumption() const;
  double default_s0() const;
  double default_iota() const;
};

std::vector<std::string> preset_names();
// Expands a preset into its scenario list (multi-variant presets expand to
// several scenarios sharing the preset prefix).
std::vector<Scenario> make_preset(const std::string& name);

// Plain-text key-value config (sections [scenario], dotted keys, comma
// arrays, # comments). A scenario block with `preset = NAME` starts from the
// preset and applies overrides.
std::vector<Scenario> parse_config(const std::string& text);
std::vector<Scenario> load_config(const std::string& path);
// Canonical normalized serialization; serialize(parse(x)) is idempotent.
std::string serialize_config(const std::vector<Scenario>& scenarios);

struct ScenarioOutcome {
  std::string name;
  int exit_code = 0;  // 0 verified, 1 violated, 2 config error, 3 numerical failure
  std::string message;
  std::optional<ConditionAudit> condition_audit;
  std::optional<AssumptionAudit> assumption_audit;
  std::vector<HardyReport> verifications;
  std::vector<ImprovedCheck> improved_checks;
  SweepResult sweep;
  std::vector<MinimizationResult> minimizations;
  std::optional<HardyReport> oracle_worst;
};

struct RunOptions {
  int jobs = 1;
  std::string out_dir;  // empty: no files written
  std::uint64_t seed = 42;
  bool plot = false;
  std::vector<ActionId> only_actions;  // empty: per-scenario configured actions
};

struct RunSummary {
  std::vector<ScenarioOutcome> outcomes;
  int exit_code = 0;
};

RunSummary run_scenarios(const std::vector<Scenario>& scenarios, const RunOptions& opts);

std::string outcome_json(const Scenario& scenario, const ScenarioOutcome& outcome);
std::string summary_json(const RunSummary& summary);

}  // namespace hardylab
