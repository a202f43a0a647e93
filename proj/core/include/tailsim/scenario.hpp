#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tailsim/engine.hpp"
#include "tailsim/estimation.hpp"
#include "tailsim/input_law.hpp"
#include "tailsim/systems.hpp"
#include "tailsim/theory.hpp"

namespace tailsim {

// What a scenario samples. BoundedExample is Stationary plus a mandatory
// boundedness verdict; Example34 runs the two couplings of one base family
// side by side and reports their tail ratio.
enum class ScenarioMode {
    Stationary,
    FiniteHorizon,
    SupWalk,
    Diagnostics,
    Example34,
    BoundedExample,
};

std::string mode_name(ScenarioMode mode);

// Declarative law description, kept separate from the built InputLaw so a
// scenario can derive sibling laws (Example34 builds both couplings from
// the same base parameters).
struct LawConfig {
    Family family = Family::Deterministic;
    Coupling coupling = Coupling::BEqualsA;
    double alpha = 0.0, shift = 0.0;       // pareto_log
    double beta = 0.0, scale = 0.0;        // weibull_log (shift shared)
    double a = 0.0, b = 0.0, d = 0.0;      // deterministic
    std::vector<Atom> atoms;               // discrete_finite
    std::shared_ptr<LawConfig> base;       // indicator_counter
};

InputLaw build_law(const LawConfig& config);

// One pass/fail assertion evaluated against the run's outputs. The type
// string selects the rule; the other fields are its parameters:
//   stationary-value        |sample - expect| <= tol (exact sampler output)
//   max-below               max sampled value <= bound + slack
//   sandwich-containment    every Wilson CI intersects
//                           [lo_scale*theory_lo, hi_scale*theory_hi]
//   ratio-band              p_hat/theory at threshold u in [lo, hi]
//   ratio-monotone-to-one   |p_hat/theory - 1| nonincreasing across
//                           `thresholds`
//   ratio-nondecreasing     p_hat/theory nondecreasing across `thresholds`
//   factor-band             Example34 factor CI at u contained in [lo, hi]
//   tv-enumeration          total variation vs exact enumeration <= bound
//   diag-verdict            diagnostics table `table` verdict == expect_text
//   diag-terminal-band      terminal convolution ratio of `table` in [lo,hi]
//   potter-threshold        table `table`: expect_text "present"/"absent"
struct CheckSpec {
    std::string type;
    double expect = 0.0;
    double tol = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    double u = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double lo_scale = 0.5;
    double hi_scale = 1.5;
    std::vector<double> thresholds;
    std::string table;
    std::string expect_text;
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    ScenarioMode mode = ScenarioMode::Stationary;
    LawConfig law;
    bool has_law = false;
    SystemKind system_kind = SystemKind::Affine;
    double arch_a1 = 0.0, arch_a2 = 0.0, arch_d = 0.0;
    std::vector<double> grid;
    std::size_t n_samples = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    // finite-horizon parameters
    int horizon_n = 0;
    double horizon_r0 = 0.0;
    double horizon_w = 0.0;
    // sampler knobs
    double rel_tol_log = 50.0;
    std::size_t max_terms = 1'000'000;
    double guard_log = 60.0;
    std::size_t max_steps = 50'000'000;
    // regime selection; auto resolves from the law's declared flags
    bool regime_auto = true;
    Regime regime;
    std::size_t trajectory_steps = 0;
    std::string out_dir;  // default "out/<name>" when empty
    std::vector<CheckSpec> checks;
};

// Parses the JSON config text. Errors name the offending field; syntax
// errors carry the parser's byte position.
Scenario parse_scenario(const std::string& json_text);

// Resolves the argument as a config file path first, then as a built-in
// scenario name.
Scenario load_scenario(const std::string& path_or_builtin);

struct BuiltinScenario {
    std::string name;
    std::string description;
    std::string config_json;
};

const std::vector<BuiltinScenario>& builtin_scenarios();

struct RunOptions {
    std::optional<std::uint64_t> seed;       // overrides the scenario's seed
    std::optional<int> workers;              // overrides worker count
    std::string out_dir;                     // overrides output directory
    bool svg = false;
    bool write_outputs = true;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct DiagTable {
    std::string name;
    std::vector<DiagRow> rows;
    std::string verdict;
    double terminal_value = 0.0;
    bool threshold_present = false;
};

struct ScenarioResult {
    std::string name;
    ScenarioMode mode = ScenarioMode::Stationary;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<CheckResult> checks;
    std::vector<std::string> artifacts;  // paths of files written
    std::string summary_json;            // content of summary.json

    TailCurve curve;             // primary curve (empty for diagnostics)
    TailCurve curve_independent; // Example34 second coupling
    std::optional<FactorEstimate> factor;
    LogReal max_sample;
    LogReal first_sample;
    double mean_terms = 0.0;     // perpetuity terms or walk steps per sample
    double tv_distance = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> record_bias;  // sup-walk stopping-bias estimate per u
    std::vector<DiagTable> tables;    // diagnostics mode

    bool all_passed() const;
};

ScenarioResult run_scenario(const Scenario& scenario,
                            const RunOptions& options);

struct TheoryCurve {
    std::vector<double> grid;
    std::vector<TailPrediction> preds;
    std::string regime_label;
};

// Prediction-only evaluation over the scenario grid (no sampling). For
// finite-horizon sandwich regimes the unknown positivity probabilities are
// replaced by their trivial bound 1, which collapses the band to its upper
// edge. Modes without a single prediction curve (Diagnostics, Example34)
// are rejected.
TheoryCurve scenario_theory(const Scenario& scenario);

// Exact distribution dump for finite-horizon scenarios over finite-support
// laws.
Enumeration scenario_enumerate(const Scenario& scenario);

}  // namespace tailsim
