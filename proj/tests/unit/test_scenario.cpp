#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include "tailsim/errors.hpp"
#include "tailsim/scenario.hpp"
#include "test_helpers.hpp"

using namespace tailsim;
using tailsim::testing::close_rel;
namespace fs = std::filesystem;

namespace {

// Small discrete finite-horizon scenario: fast enough to run several times
// inside one test binary.
const char* kCoinChain = R"({
  "schema_version": 1,
  "name": "coin-chain",
  "mode": "finite-horizon",
  "law": {"family": "discrete_finite", "atoms": [
    {"a": 0.5, "b": 0.0, "d": 0.0, "prob": 0.5},
    {"a": 0.5, "b": 1.0, "d": 0.0, "prob": 0.5}
  ]},
  "horizon": {"n": 6, "r0": 0.0, "w": 0.0},
  "n_samples": 20000,
  "grid": [-0.7, 0.0, 0.5],
  "seed": 11,
  "checks": [
    {"type": "tv-enumeration", "bound": 0.05}
  ]
})";

RunOptions no_outputs() {
    RunOptions opt;
    opt.write_outputs = false;
    return opt;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("builtin catalog parses and names are consistent") {
    const auto& catalog = builtin_scenarios();
    REQUIRE(catalog.size() == 8);
    const std::vector<std::string> expected{
        "deterministic-smoke", "enumeration-check", "thm33-finite-horizon",
        "thm25-sup-walk",      "thm31-positive-bd", "example-3-4",
        "bounded-example",     "class-diagnostics"};
    for (const std::string& name : expected) {
        bool found = false;
        for (const auto& b : catalog) {
            if (b.name == name) {
                found = true;
                const Scenario s = parse_scenario(b.config_json);
                CHECK(s.name == name);
                CHECK(!b.description.empty());
            }
        }
        CHECK_MESSAGE(found, name);
    }
}

TEST_CASE("config validation names the offending field") {
    auto parse_fails = [](const std::string& text, const std::string& needle) {
        try {
            parse_scenario(text);
            FAIL_CHECK("expected ConfigError for ", text);
        } catch (const ConfigError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                          e.what());
        }
    };
    parse_fails("{", "not valid JSON");
    parse_fails(R"({"schema_version": 2, "name": "x", "mode": "stationary"})",
                "schema_version");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "warp"})", "mode");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary",
                    "bogus": 1})",
                "bogus");
    // stationary scenarios need a law and a sample count
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary"})",
                "law");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary",
                    "law": {"family": "deterministic", "a": 0.5, "b": 1}})",
                "n_samples");
    // the horizon block belongs to finite-horizon runs only
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary",
                    "law": {"family": "deterministic", "a": 0.5, "b": 1},
                    "n_samples": 10, "horizon": {"n": 3}})",
                "horizon");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary",
                    "law": {"family": "deterministic", "a": 0.5, "b": 1},
                    "n_samples": 10, "grid": [2, 1]})",
                "grid");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary",
                    "law": {"family": "pareto_log", "alpha": 2, "shift": 4,
                            "coupling": "psychic"},
                    "n_samples": 10})",
                "coupling");
    // checks are validated against the mode
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary",
                    "law": {"family": "deterministic", "a": 0.5, "b": 1},
                    "n_samples": 10,
                    "checks": [{"type": "tv-enumeration", "bound": 0.1}]})",
                "checks[0]");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "stationary",
                    "law": {"family": "deterministic", "a": 0.5, "b": 1},
                    "n_samples": 10, "checks": [{"type": "no-such-check"}]})",
                "type");
    // bounded-example scenarios must actually assert boundedness
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "bounded-example",
                    "law": {"family": "indicator_counter",
                            "base": {"family": "pareto_log", "alpha": 2,
                                     "shift": 4}},
                    "n_samples": 10})",
                "max-below");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "example-3-4",
                    "law": {"family": "deterministic", "a": 0.5, "b": 1},
                    "n_samples": 10})",
                "family");
    parse_fails(R"({"schema_version": 1, "name": "bad name", "mode": "diagnostics"})",
                "name");
    parse_fails(R"({"schema_version": 1, "name": "x", "mode": "diagnostics",
                    "n_samples": 5})",
                "n_samples");
}

TEST_CASE("load_scenario prefers files and falls back to builtin names") {
    const fs::path p = fs::temp_directory_path() / "tailsim_cfg_test.json";
    {
        std::ofstream out(p);
        out << kCoinChain;
    }
    const Scenario from_file = load_scenario(p.string());
    CHECK(from_file.name == "coin-chain");
    const Scenario builtin = load_scenario("deterministic-smoke");
    CHECK(builtin.name == "deterministic-smoke");
    CHECK_THROWS_AS(load_scenario("definitely-not-a-scenario"), ConfigError);
    fs::remove(p);
}

TEST_CASE("deterministic scenario pins the sampler output exactly") {
    const Scenario s = load_scenario("deterministic-smoke");
    const ScenarioResult r = run_scenario(s, no_outputs());
    CHECK(r.all_passed());
    REQUIRE(r.checks.size() == 1);
    CHECK(r.checks[0].pass);
    CHECK(r.first_sample.to_double() == 2.0);
    CHECK(r.max_sample.to_double() == 2.0);
    REQUIRE(r.curve.counts.size() == 3);
    CHECK(r.curve.counts[0] == 1000);  // 2 > e^0
    CHECK(r.curve.counts[1] == 1000);  // 2 > e^0.69
    CHECK(r.curve.counts[2] == 0);     // 2 < e^0.7
    CHECK(r.curve.regime == "GeneralBounds");
}

TEST_CASE("summary bytes are reproducible and worker-count invariant") {
    const Scenario s = parse_scenario(kCoinChain);

    RunOptions opt = no_outputs();
    const ScenarioResult a = run_scenario(s, opt);
    const ScenarioResult b = run_scenario(s, opt);
    CHECK(a.summary_json == b.summary_json);

    opt.workers = 5;
    const ScenarioResult c = run_scenario(s, opt);
    CHECK(a.summary_json == c.summary_json);
    CHECK(a.curve.counts == c.curve.counts);
    CHECK(a.tv_distance == c.tv_distance);

    RunOptions reseeded = no_outputs();
    reseeded.seed = 99;
    const ScenarioResult d = run_scenario(s, reseeded);
    CHECK(a.summary_json != d.summary_json);
}

TEST_CASE("finite-horizon total variation against exact enumeration") {
    const Scenario s = parse_scenario(kCoinChain);
    const ScenarioResult r = run_scenario(s, no_outputs());
    REQUIRE(std::isfinite(r.tv_distance));
    // 64 equally likely states at 2e4 samples: expected TV about 0.018
    CHECK(r.tv_distance < 0.05);
    CHECK(r.tv_distance > 0.0);
    CHECK(r.all_passed());

    const Enumeration e = scenario_enumerate(s);
    CHECK(e.values.size() == 64);
    const double mass = std::accumulate(e.probs.begin(), e.probs.end(), 0.0);
    CHECK(close_rel(mass, 1.0, 1e-12));
    CHECK(std::is_sorted(e.values.begin(), e.values.end()));

    CHECK_THROWS_AS(scenario_enumerate(load_scenario("deterministic-smoke")),
                    ConfigError);
}

TEST_CASE("coupling comparison doubles the tail") {
    const Scenario s = parse_scenario(R"({
      "schema_version": 1,
      "name": "coupling-mini",
      "mode": "example-3-4",
      "law": {"family": "pareto_log", "alpha": 2.0, "shift": 4.0},
      "n_samples": 30000,
      "grid": [5.0, 10.0],
      "seed": 5,
      "checks": [
        {"type": "factor-band", "u": 10.0, "lo": 1.5, "hi": 2.5}
      ]
    })");
    const ScenarioResult r = run_scenario(s, no_outputs());
    CHECK(r.all_passed());
    REQUIRE(r.factor.has_value());
    CHECK(r.factor->factor > 1.6);
    CHECK(r.factor->factor < 2.4);
    CHECK(r.factor->lo < r.factor->factor);
    CHECK(r.factor->hi > r.factor->factor);
    // both curves carry point predictions from the exact-constant regime
    CHECK(r.curve.regime == "PositiveBD");
    CHECK(r.curve_independent.regime == "PositiveBD");
    // the independent coupling has roughly twice the exceedances
    REQUIRE(r.curve.counts.size() == 2);
    CHECK(r.curve_independent.counts[0] > r.curve.counts[0]);
}

TEST_CASE("diagnostics battery passes its own checks") {
    const Scenario s = load_scenario("class-diagnostics");
    const ScenarioResult r = run_scenario(s, no_outputs());
    CHECK(r.checks.size() == 6);
    CHECK(r.all_passed());
    REQUIRE(r.tables.size() == 5);
    for (const auto& t : r.tables) CHECK(!t.rows.empty());
}

TEST_CASE("failing checks flip the verdict but not the run") {
    // impossible band: the deterministic fixed point is 2, demand 3
    Scenario s = load_scenario("deterministic-smoke");
    REQUIRE(s.checks.size() == 1);
    s.checks[0].expect = 3.0;
    const ScenarioResult r = run_scenario(s, no_outputs());
    CHECK(!r.all_passed());
    CHECK(!r.checks[0].pass);
    CHECK(r.checks[0].detail.find("expect=3") != std::string::npos);
}

TEST_CASE("artifact files land in the output directory") {
    const fs::path dir = fs::temp_directory_path() / "tailsim_artifacts_test";
    fs::remove_all(dir);

    Scenario s = parse_scenario(kCoinChain);
    s.trajectory_steps = 8;
    RunOptions opt;
    opt.out_dir = dir.string();
    opt.svg = true;
    const ScenarioResult r = run_scenario(s, opt);

    CHECK(fs::exists(dir / "tail_curve.csv"));
    CHECK(fs::exists(dir / "enumeration.csv"));
    CHECK(fs::exists(dir / "trajectory.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "metadata.json"));
    CHECK(slurp(dir / "summary.json") == r.summary_json);

    // trajectory has a start row plus one row per step
    const std::string traj = slurp(dir / "trajectory.csv");
    std::size_t lines = 0;
    for (char ch : traj) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 2 + 9);  // preamble + header + 9 states

    // rerun reproduces every data file byte for byte
    const fs::path dir2 = fs::temp_directory_path() / "tailsim_artifacts_test2";
    fs::remove_all(dir2);
    RunOptions opt2 = opt;
    opt2.out_dir = dir2.string();
    run_scenario(s, opt2);
    for (const char* name :
         {"tail_curve.csv", "enumeration.csv", "trajectory.csv", "summary.json"}) {
        CHECK_MESSAGE(slurp(dir / name) == slurp(dir2 / name), name);
    }

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("theory evaluation matches the regimes") {
    const TheoryCurve fixed = scenario_theory(load_scenario("thm31-positive-bd"));
    CHECK(fixed.regime_label == "PositiveBD");
    REQUIRE(fixed.preds.size() == 3);
    // 1 / (mu (u + 4)) with mu = 2 at u = 50, 100, 200
    CHECK(close_rel(*fixed.preds[0].point, 1.0 / 108.0, 1e-12));
    CHECK(close_rel(*fixed.preds[1].point, 1.0 / 208.0, 1e-12));
    CHECK(close_rel(*fixed.preds[2].point, 1.0 / 408.0, 1e-12));

    const TheoryCurve walk = scenario_theory(load_scenario("thm25-sup-walk"));
    CHECK(walk.regime_label == "SupWalk");
    CHECK(close_rel(*walk.preds[2].point, 0.0025, 1e-9));

    // finite-horizon sandwich with positivity bounded by 1 collapses
    const TheoryCurve coin = scenario_theory(parse_scenario(kCoinChain));
    CHECK(coin.regime_label == "GeneralBounds");
    for (const auto& p : coin.preds) CHECK(p.lower == p.upper);

    CHECK_THROWS_AS(scenario_theory(load_scenario("class-diagnostics")),
                    ConfigError);
    CHECK_THROWS_AS(scenario_theory(load_scenario("example-3-4")), ConfigError);
}

TEST_CASE("worker override is validated") {
    const Scenario s = load_scenario("deterministic-smoke");
    RunOptions opt = no_outputs();
    opt.workers = 0;
    CHECK_THROWS_AS(run_scenario(s, opt), ConfigError);
}
