// hardylab: numerical verification of sharp Hardy inequalities on radial
// space-form models. Subcommands tabulate the comparison kernel, audit the
// structural assumptions, verify inequalities against test functions, run
// almost-extremal sweeps and Rayleigh minimizations, and emit CSV/JSON/SVG
// reports.

#include <iostream>

#include "CLI11.hpp"
#include "hardylab/scenario.hpp"

namespace {

using namespace hardylab;

struct CommonArgs {
  std::string config;
  std::vector<std::string> presets;
  std::string out_dir;
  std::uint64_t seed = 42;
  int jobs = 1;
  bool plot = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "scenario config file");
  cmd->add_option("--preset", args.presets, "built-in preset name (repeatable)");
  cmd->add_option("--out", args.out_dir, "output directory for reports");
  cmd->add_option("--seed", args.seed, "base random seed");
  cmd->add_option("--jobs", args.jobs, "scenario-level parallelism");
  cmd->add_flag("--plot", args.plot, "emit sweep SVG plots");
}

std::vector<Scenario> collect(const CommonArgs& args) {
  std::vector<Scenario> scenarios;
  if (!args.config.empty()) {
    auto fromfile = load_config(args.config);
    scenarios.insert(scenarios.end(), fromfile.begin(), fromfile.end());
  }
  for (const auto& p : args.presets) {
    auto expanded = make_preset(p);
    scenarios.insert(scenarios.end(), expanded.begin(), expanded.end());
  }
  return scenarios;
}

int run_action(const CommonArgs& args, std::vector<ActionId> only) {
  std::vector<Scenario> scenarios;
  try {
    scenarios = collect(args);
  } catch (const config_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (scenarios.empty()) {
    std::cout << "no scenarios configured\n";
    return 0;
  }
  RunOptions ropts;
  ropts.jobs = args.jobs;
  ropts.out_dir = args.out_dir;
  ropts.seed = args.seed;
  ropts.plot = args.plot;
  ropts.only_actions = std::move(only);
  RunSummary summary = run_scenarios(scenarios, ropts);
  for (const auto& o : summary.outcomes)
    std::cout << (o.exit_code == 0 ? "[ ok ] " : "[FAIL] ") << o.name << ": "
              << o.message << "\n";
  std::cout << "exit code " << summary.exit_code << "\n";
  return summary.exit_code;
}

int run_basis(double lambda, double kappa, int m, int n, double t_min, double t_max,
              int count, const std::string& out_file) {
  try {
    const CurvaturePair pair{lambda, kappa};
    const ExtReal z = first_zero(pair);
    const ExtReal horizon = t_horizon(n, pair);
    std::cout << "lambda = " << lambda << ", kappa = " << kappa << "\n";
    std::cout << "r_lambda = "
              << (r_lambda(lambda).finite() ? format_double(r_lambda(lambda).value())
                                            : "inf")
              << "\n";
    std::cout << "first_zero = " << (z.finite() ? format_double(z.value()) : "inf")
              << "\n";
    std::cout << "t_horizon(n=" << n << ") = "
              << (horizon.finite() ? format_double(horizon.value()) : "inf") << "\n";

    double hi = t_max;
    if (hi <= 0.0) hi = std::min(horizon.value_or(10.0), 10.0) * 0.999;
    CsvTable t;
    t.header = {"t", "s_lambda", "c_lambda", "ds", "dc", "g_value"};
    const GProfile profile{m, n, pair};
    for (double x : interior_grid(t_min, hi, count)) {
      t.rows.push_back({format_double(x), format_double(s_lambda(lambda, x)),
                        format_double(c_lambda(lambda, x)),
                        format_double(ds_lambda(lambda, x)),
                        format_double(dc_lambda(lambda, x)),
                        format_double(g_value(profile, x))});
    }
    if (out_file.empty())
      std::cout << t.to_string();
    else
      write_text_file(out_file, t.to_string());
    return 0;
  } catch (const config_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hardylab: sharp Hardy inequality verification on radial models"};
  app.require_subcommand(1);

  CommonArgs args;

  double b_lambda = 0.0, b_kappa = 0.0, b_tmin = 0.0, b_tmax = 0.0;
  int b_m = 3, b_n = 0, b_count = 50;
  std::string b_out;
  auto* basis = app.add_subcommand("basis", "tabulate s, c, G and first zeros");
  basis->add_option("--lambda", b_lambda, "curvature parameter");
  basis->add_option("--kappa", b_kappa, "mean-curvature parameter");
  basis->add_option("--m", b_m, "ambient dimension");
  basis->add_option("--n", b_n, "submanifold dimension");
  basis->add_option("--t-min", b_tmin, "table start");
  basis->add_option("--t-max", b_tmax, "table end (0: auto)");
  basis->add_option("--count", b_count, "number of rows");
  basis->add_option("--out", b_out, "CSV output file (stdout when empty)");

  auto* audit = app.add_subcommand("audit", "run assumption and condition audits");
  auto* verify = app.add_subcommand("verify", "verify inequalities on test functions");
  auto* sweep = app.add_subcommand("sweep", "almost-extremal sharpness sweeps");
  auto* minimize = app.add_subcommand("minimize", "spline Rayleigh minimization");
  auto* oracle = app.add_subcommand("oracle", "random test-function oracle");
  auto* all = app.add_subcommand("all", "run each scenario's configured actions");
  for (auto* cmd : {audit, verify, sweep, minimize, oracle, all}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  if (basis->parsed())
    return run_basis(b_lambda, b_kappa, b_m, b_n, b_tmin, b_tmax, b_count, b_out);
  if (audit->parsed()) return run_action(args, {ActionId::audit});
  if (verify->parsed()) return run_action(args, {ActionId::verify});
  if (sweep->parsed()) return run_action(args, {ActionId::sweep});
  if (minimize->parsed()) return run_action(args, {ActionId::minimize});
  if (oracle->parsed()) return run_action(args, {ActionId::oracle});
  return run_action(args, {});
}
