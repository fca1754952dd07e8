#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hardylab/scenario.hpp"

using namespace hardylab;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}
}  // namespace

TEST_CASE("preset registry") {
  auto names = preset_names();
  for (const char* required :
       {"euclidean-point", "sphere-hemisphere", "hyperbolic-point", "exterior-ball",
        "sphere-great-sphere", "cylinder-counterexample"}) {
    CHECK(std::find(names.begin(), names.end(), required) != names.end());
  }
  auto eu = make_preset("euclidean-point");
  REQUIRE(eu.size() == 2);
  CHECK(eu[0].geometry.m == 3);
  CHECK(eu[0].geometry.n == 0);
  CHECK(eu[0].geometry.lambda == 0.0);
  CHECK(eu[0].power.beta == -2.0);
  CHECK(eu[0].p() == 2.0);
  CHECK(eu[0].theorem == TheoremId::T3_4);
  CHECK(eu[1].theorem == TheoremId::T4_4);
  CHECK_THROWS_AS(make_preset("not-a-preset"), config_error);
}

TEST_CASE("config parsing") {
  SUBCASE("empty file gives an empty scenario list") {
    CHECK(parse_config("").empty());
    CHECK(parse_config("# only comments\n\n").empty());
  }
  SUBCASE("round trip is idempotent after one normalization") {
    const std::string cfg = R"([scenario]
name = my-run
preset = euclidean-point
p = 2
sweep.epsilons = 0.1, 0.05
oracle.trials = 7
)";
    auto first = serialize_config(parse_config(cfg));
    auto second = serialize_config(parse_config(first));
    CHECK(first == second);
    auto scenarios = parse_config(first);
    REQUIRE(scenarios.size() == 1);
    CHECK(scenarios[0].name == "my-run");
    CHECK(scenarios[0].oracle.trials == 7);
    CHECK(scenarios[0].sweep.epsilons == std::vector<double>{0.1, 0.05});
  }
  SUBCASE("constraint violations are collected and reported") {
    const std::string cfg = R"([scenario]
name = broken
geometry.m = 3
geometry.n = 0
pair.family = power
pair.beta = -3
)";
    CHECK_THROWS_AS(parse_config(cfg), config_error);
    const std::string cfg2 = "[scenario]\nugly line\nalso.unknown = 1\n";
    try {
      parse_config(cfg2);
      CHECK(false);
    } catch (const config_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("expected key = value") != std::string::npos);
      CHECK(msg.find("unknown key") != std::string::npos);
    }
  }
}

TEST_CASE("runner exit codes") {
  SUBCASE("forced violation through an inflated constant") {
    auto sc = make_preset("euclidean-point")[0];
    sc.constant_scale = 1.01;
    sc.actions = {ActionId::sweep};
    sc.sweep.epsilons = {0.005, 0.002};
    RunOptions ropts;
    auto summary = run_scenarios({sc}, ropts);
    CHECK(summary.exit_code == 1);
  }
  SUBCASE("degenerate beta is a configuration error") {
    auto sc = make_preset("euclidean-point")[0];
    sc.power.beta = -3.0;  // beta = -(m-n)
    RunOptions ropts;
    auto summary = run_scenarios({sc}, ropts);
    CHECK(summary.exit_code == 2);
  }
}

TEST_CASE("determinism of emitted reports") {
  auto sc = make_preset("euclidean-point")[0];
  sc.actions = {ActionId::sweep, ActionId::oracle};
  sc.sweep.epsilons = {0.2, 0.1};
  sc.oracle.trials = 5;
  const std::string dir1 = "det_check_1", dir2 = "det_check_2";
  RunOptions o1;
  o1.out_dir = dir1;
  o1.seed = 7;
  RunOptions o2;
  o2.out_dir = dir2;
  o2.seed = 7;
  CHECK(run_scenarios({sc}, o1).exit_code == 0);
  CHECK(run_scenarios({sc}, o2).exit_code == 0);
  CHECK(slurp(dir1 + "/euclidean-point/sweep.csv") ==
        slurp(dir2 + "/euclidean-point/sweep.csv"));
  CHECK(slurp(dir1 + "/euclidean-point/oracle.csv") ==
        slurp(dir2 + "/euclidean-point/oracle.csv"));
  CHECK(slurp(dir1 + "/summary.json") == slurp(dir2 + "/summary.json"));
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("CSV quoting and SVG plotting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");

  auto sc = make_preset("euclidean-point")[0];
  auto pair = sc.make_pair();
  auto dens = sc.densities();
  auto sweep = sharpness_sweep(pair, sc.geometry, sc.domain, dens,
                               NuVariant::increasing, {0.2, 0.1}, 1.0);
  const std::string svg = sweep_svg("x", sweep);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  SweepResult single;
  single.rows.push_back(sweep.rows.front());
  CHECK_THROWS_AS(sweep_svg("x", single), config_error);
}
