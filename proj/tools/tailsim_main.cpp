#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tailsim/csv_io.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/scenario.hpp"

namespace {

// Exit codes: 0 all checks passed, 1 operational failure (bad config, IO),
// 2 run completed but at least one check failed.
constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out;
    bool svg = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", [&flags](const CLI::results_t& res) {
           flags.seed = std::stoull(res[0]);
           return true;
       },
       "Override the scenario seed")
        ->expected(1);
    cmd->add_option("--workers", [&flags](const CLI::results_t& res) {
           flags.workers = std::stoi(res[0]);
           return true;
       },
       "Worker thread count (results are identical for any value)")
        ->expected(1);
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_flag("--svg", flags.svg, "Also render SVG plots");
}

int run_scenario_command(const std::string& config, const CommonFlags& flags) {
    const tailsim::Scenario scenario = tailsim::load_scenario(config);
    tailsim::RunOptions options;
    options.seed = flags.seed;
    options.workers = flags.workers;
    options.out_dir = flags.out;
    options.svg = flags.svg;
    const tailsim::ScenarioResult result = tailsim::run_scenario(scenario, options);

    for (const auto& check : result.checks) {
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << ": "
                  << check.detail << "\n";
    }
    std::size_t passed = 0;
    for (const auto& check : result.checks) passed += check.pass ? 1 : 0;
    std::cout << "scenario " << result.name << ": " << passed << "/"
              << result.checks.size() << " checks passed";
    if (!result.artifacts.empty()) {
        // summary.json is always the second-to-last artifact; report its
        // directory as the run's output location
        const std::string& last = result.artifacts.back();
        const auto slash = last.find_last_of('/');
        std::cout << "; outputs in "
                  << (slash == std::string::npos ? "." : last.substr(0, slash));
    }
    std::cout << "\n";
    return result.all_passed() ? kExitPass : kExitCheckFailed;
}

void write_or_print(const std::string& out, const std::string& content) {
    if (out.empty()) {
        std::cout << content;
    } else {
        tailsim::write_text_atomic(out, content);
        std::cout << "wrote " << out << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Tail asymptotics of iterated random Lipschitz maps: samplers, "
        "predictions, and class diagnostics"};
    app.require_subcommand(1);

    std::string run_config;
    CommonFlags run_flags;
    CLI::App* cmd_run =
        app.add_subcommand("run", "Run a scenario and evaluate its checks");
    cmd_run->add_option("config", run_config,
                        "Config file path or built-in scenario name")
        ->required();
    add_common_flags(cmd_run, run_flags);

    CLI::App* cmd_list = app.add_subcommand("list", "List built-in scenarios");

    std::string theory_config;
    std::string theory_out;
    CLI::App* cmd_theory = app.add_subcommand(
        "theory", "Print the prediction curve for a scenario (no sampling)");
    cmd_theory->add_option("config", theory_config,
                           "Config file path or built-in scenario name")
        ->required();
    cmd_theory->add_option("--out", theory_out, "Write CSV here instead of stdout");

    std::string diag_config = "class-diagnostics";
    CommonFlags diag_flags;
    CLI::App* cmd_diag = app.add_subcommand(
        "diagnose", "Run the tail-class diagnostics battery");
    cmd_diag->add_option("config", diag_config,
                         "Diagnostics scenario (default: class-diagnostics)");
    add_common_flags(cmd_diag, diag_flags);

    std::string enum_config;
    std::string enum_out;
    CLI::App* cmd_enum = app.add_subcommand(
        "enumerate", "Exact n-step distribution of a finite-support scenario");
    cmd_enum->add_option("config", enum_config,
                         "Config file path or built-in scenario name")
        ->required();
    cmd_enum->add_option("--out", enum_out, "Write CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            return run_scenario_command(run_config, run_flags);
        }
        if (cmd_list->parsed()) {
            for (const auto& b : tailsim::builtin_scenarios()) {
                std::cout << b.name << "\n    " << b.description << "\n";
            }
            return kExitPass;
        }
        if (cmd_theory->parsed()) {
            const tailsim::Scenario scenario = tailsim::load_scenario(theory_config);
            const tailsim::TheoryCurve curve = tailsim::scenario_theory(scenario);
            write_or_print(theory_out,
                           tailsim::prediction_csv(curve.grid, curve.preds,
                                                   curve.regime_label,
                                                   scenario.name, scenario.seed));
            return kExitPass;
        }
        if (cmd_diag->parsed()) {
            return run_scenario_command(diag_config, diag_flags);
        }
        if (cmd_enum->parsed()) {
            const tailsim::Scenario scenario = tailsim::load_scenario(enum_config);
            const tailsim::Enumeration e = tailsim::scenario_enumerate(scenario);
            write_or_print(enum_out, tailsim::enumeration_csv(
                                         e.values, e.probs, scenario.name));
            return kExitPass;
        }
    } catch (const tailsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
