#include "tailsim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "tailsim/csv_io.hpp"
#include "tailsim/diagnostics.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/svg_plot.hpp"

namespace tailsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Logical RNG components. Sample i of component c always reads stream
// component_stream(c, i), so results never depend on how samples are
// partitioned across workers.
constexpr std::uint64_t kStreamStationary = 1;
constexpr std::uint64_t kStreamFiniteHorizon = 2;
constexpr std::uint64_t kStreamSupWalk = 3;
constexpr std::uint64_t kStreamCouplingOne = 4;
constexpr std::uint64_t kStreamCouplingTwo = 5;
constexpr std::uint64_t kStreamTrajectory = 6;

// Exceedances of e^u come from single large terms of the backward series,
// so a run that estimates P[R > e^u] must keep drawing until the dropped
// tail sits far below e^u, not merely far below the running sample scale.
// Deepening the resolution with the top threshold keeps the stopping bias
// a small fraction of the smallest probability being measured; bounded
// scenarios opt out because their deep tail is exactly zero.
double stationary_depth(double configured, const std::vector<double>& grid) {
    if (grid.empty()) return configured;
    return std::max(configured, grid.back() + 260.0);
}

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
}

std::string join_path(const std::string& ctx, const std::string& key) {
    return ctx.empty() ? key : ctx + "." + key;
}

void require_object(const json& v, const std::string& ctx) {
    if (!v.is_object()) fail_field(ctx.empty() ? "(root)" : ctx, "expected an object");
}

void allow_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail_field(join_path(ctx, it.key()), "unknown field");
    }
}

double get_number(const json& obj, const std::string& ctx, const char* key,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail_field(join_path(ctx, key), "required number missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) fail_field(join_path(ctx, key), "expected a number");
    return v.get<double>();
}

// Counts arrive as JSON numbers; 1e7 parses as a float, so integral doubles
// are accepted as long as they are exact.
std::size_t get_count(const json& obj, const std::string& ctx, const char* key,
                      std::optional<std::size_t> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail_field(join_path(ctx, key), "required count missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) fail_field(join_path(ctx, key), "expected a count");
    const double d = v.get<double>();
    if (!(d >= 0.0) || d > 9e15 || d != std::floor(d)) {
        fail_field(join_path(ctx, key), "expected a nonnegative integer");
    }
    return static_cast<std::size_t>(d);
}

std::string get_string(const json& obj, const std::string& ctx, const char* key,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail_field(join_path(ctx, key), "required string missing");
    }
    const json& v = obj.at(key);
    if (!v.is_string()) fail_field(join_path(ctx, key), "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_number_array(const json& obj, const std::string& ctx,
                                     const char* key) {
    const json& v = obj.at(key);
    if (!v.is_array()) fail_field(join_path(ctx, key), "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number()) fail_field(join_path(ctx, key), "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Coupling parse_coupling(const std::string& s, const std::string& field) {
    if (s == "b_equals_a") return Coupling::BEqualsA;
    if (s == "independent") return Coupling::Independent;
    fail_field(field, "expected 'b_equals_a' or 'independent', got '" + s + "'");
}

LawConfig parse_law(const json& j, const std::string& ctx) {
    require_object(j, ctx);
    LawConfig cfg;
    const std::string fam = get_string(j, ctx, "family");
    if (fam == "pareto_log") {
        allow_keys(j, ctx, {"family", "alpha", "shift", "coupling"});
        cfg.family = Family::ParetoLog;
        cfg.alpha = get_number(j, ctx, "alpha");
        cfg.shift = get_number(j, ctx, "shift");
        cfg.coupling = parse_coupling(
            get_string(j, ctx, "coupling", std::string("b_equals_a")),
            join_path(ctx, "coupling"));
    } else if (fam == "weibull_log") {
        allow_keys(j, ctx, {"family", "beta", "scale", "shift", "coupling"});
        cfg.family = Family::WeibullLog;
        cfg.beta = get_number(j, ctx, "beta");
        cfg.scale = get_number(j, ctx, "scale");
        cfg.shift = get_number(j, ctx, "shift");
        cfg.coupling = parse_coupling(
            get_string(j, ctx, "coupling", std::string("b_equals_a")),
            join_path(ctx, "coupling"));
    } else if (fam == "deterministic") {
        allow_keys(j, ctx, {"family", "a", "b", "d"});
        cfg.family = Family::Deterministic;
        cfg.a = get_number(j, ctx, "a");
        cfg.b = get_number(j, ctx, "b");
        cfg.d = get_number(j, ctx, "d", 0.0);
    } else if (fam == "discrete_finite") {
        allow_keys(j, ctx, {"family", "atoms"});
        cfg.family = Family::DiscreteFinite;
        if (!j.contains("atoms") || !j.at("atoms").is_array() || j.at("atoms").empty()) {
            fail_field(join_path(ctx, "atoms"), "expected a non-empty array");
        }
        std::size_t idx = 0;
        for (const json& a : j.at("atoms")) {
            const std::string actx = join_path(ctx, "atoms[" + std::to_string(idx) + "]");
            require_object(a, actx);
            allow_keys(a, actx, {"a", "b", "d", "prob"});
            Atom atom;
            atom.a = get_number(a, actx, "a");
            atom.b = get_number(a, actx, "b");
            atom.d = get_number(a, actx, "d", 0.0);
            atom.prob = get_number(a, actx, "prob");
            cfg.atoms.push_back(atom);
            ++idx;
        }
    } else if (fam == "indicator_counter") {
        allow_keys(j, ctx, {"family", "base"});
        cfg.family = Family::IndicatorCounter;
        if (!j.contains("base")) fail_field(join_path(ctx, "base"), "required object missing");
        cfg.base = std::make_shared<LawConfig>(parse_law(j.at("base"), join_path(ctx, "base")));
    } else {
        fail_field(join_path(ctx, "family"), "unknown family '" + fam + "'");
    }
    return cfg;
}

CheckSpec parse_check(const json& j, const std::string& ctx) {
    require_object(j, ctx);
    allow_keys(j, ctx,
               {"type", "expect", "tol", "bound", "slack", "u", "lo", "hi",
                "lo_scale", "hi_scale", "thresholds", "table", "expect_text"});
    CheckSpec c;
    c.type = get_string(j, ctx, "type");
    static const std::set<std::string> kTypes{
        "stationary-value",   "max-below",
        "sandwich-containment", "ratio-band",
        "ratio-monotone-to-one", "ratio-nondecreasing",
        "factor-band",        "tv-enumeration",
        "diag-verdict",       "diag-terminal-band",
        "potter-threshold"};
    if (!kTypes.count(c.type)) {
        fail_field(join_path(ctx, "type"), "unknown check type '" + c.type + "'");
    }
    c.expect = get_number(j, ctx, "expect", 0.0);
    c.tol = get_number(j, ctx, "tol", 0.0);
    c.bound = get_number(j, ctx, "bound", 0.0);
    c.slack = get_number(j, ctx, "slack", 0.0);
    c.u = get_number(j, ctx, "u", 0.0);
    c.lo = get_number(j, ctx, "lo", 0.0);
    c.hi = get_number(j, ctx, "hi", 0.0);
    c.lo_scale = get_number(j, ctx, "lo_scale", 0.5);
    c.hi_scale = get_number(j, ctx, "hi_scale", 1.5);
    if (j.contains("thresholds")) c.thresholds = get_number_array(j, ctx, "thresholds");
    c.table = get_string(j, ctx, "table", std::string());
    c.expect_text = get_string(j, ctx, "expect_text", std::string());
    return c;
}

// table of which check types each mode can evaluate
bool check_allowed(ScenarioMode mode, const std::string& type) {
    const bool value_mode = mode == ScenarioMode::Stationary ||
                            mode == ScenarioMode::BoundedExample ||
                            mode == ScenarioMode::FiniteHorizon;
    const bool curve_mode = value_mode || mode == ScenarioMode::SupWalk;
    if (type == "stationary-value" || type == "max-below") return value_mode;
    if (type == "sandwich-containment" || type == "ratio-band" ||
        type == "ratio-monotone-to-one" || type == "ratio-nondecreasing") {
        return curve_mode;
    }
    if (type == "factor-band") return mode == ScenarioMode::Example34;
    if (type == "tv-enumeration") return mode == ScenarioMode::FiniteHorizon;
    if (type == "diag-verdict" || type == "diag-terminal-band" ||
        type == "potter-threshold") {
        return mode == ScenarioMode::Diagnostics;
    }
    return false;
}

ScenarioMode parse_mode(const std::string& s) {
    if (s == "stationary") return ScenarioMode::Stationary;
    if (s == "finite-horizon") return ScenarioMode::FiniteHorizon;
    if (s == "sup-walk") return ScenarioMode::SupWalk;
    if (s == "diagnostics") return ScenarioMode::Diagnostics;
    if (s == "example-3-4") return ScenarioMode::Example34;
    if (s == "bounded-example") return ScenarioMode::BoundedExample;
    fail_field("mode", "unknown mode '" + s + "'");
}

bool valid_name(const std::string& name) {
    if (name.empty() || name.size() > 128) return false;
    for (char ch : name) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                        (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' ||
                        ch == '.';
        if (!ok) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Sharded sampling. Every accumulator below is integer-valued (counts,
// term/step totals), so merged results are exactly independent of the worker
// count; only wall time changes.

struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;
};

std::vector<Range> shard(std::size_t n, int workers) {
    const std::size_t w = static_cast<std::size_t>(std::max(1, workers));
    std::vector<Range> out;
    const std::size_t base = n / w;
    const std::size_t rem = n % w;
    std::size_t start = 0;
    for (std::size_t i = 0; i < w; ++i) {
        const std::size_t len = base + (i < rem ? 1 : 0);
        if (len == 0) continue;
        out.push_back({start, start + len});
        start += len;
    }
    return out;
}

// Runs body(slot, begin, end) over the ranges, one thread per range past the
// first. Exceptions propagate; the first worker's (by slot order) wins.
template <typename Body>
void run_sharded(const std::vector<Range>& ranges, Body&& body) {
    if (ranges.empty()) return;
    if (ranges.size() == 1) {
        body(std::size_t{0}, ranges[0].begin, ranges[0].end);
        return;
    }
    std::vector<std::exception_ptr> errors(ranges.size());
    std::vector<std::thread> threads;
    threads.reserve(ranges.size());
    for (std::size_t slot = 0; slot < ranges.size(); ++slot) {
        threads.emplace_back([&, slot] {
            try {
                body(slot, ranges[slot].begin, ranges[slot].end);
            } catch (...) {
                errors[slot] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void count_exceedance(const LogReal& v, const std::vector<double>& grid,
                      std::vector<std::size_t>& counts) {
    if (v.sign <= 0) return;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (v.log_mag > grid[g]) {
            ++counts[g];
        } else {
            break;  // grid is increasing, later thresholds cannot be exceeded
        }
    }
}

struct StationaryAccum {
    std::vector<std::size_t> counts;
    std::size_t total_terms = 0;
    LogReal max_value;
    bool has_max = false;
    LogReal first;
    bool has_first = false;

    void merge(const StationaryAccum& o) {
        if (counts.empty()) counts.assign(o.counts.size(), 0);
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
        total_terms += o.total_terms;
        if (o.has_max) {
            max_value = has_max ? max(max_value, o.max_value) : o.max_value;
            has_max = true;
        }
        if (o.has_first) {
            first = o.first;
            has_first = true;
        }
    }
};

StationaryAccum sample_stationary(const LipschitzSystem& system,
                                  const std::vector<double>& grid,
                                  std::size_t n, std::uint64_t seed,
                                  std::uint64_t component, int workers,
                                  const PerpetuityOptions& opts) {
    const auto ranges = shard(n, workers);
    std::vector<StationaryAccum> parts(ranges.size());
    run_sharded(ranges, [&](std::size_t slot, std::size_t b, std::size_t e) {
        StationaryAccum& acc = parts[slot];
        acc.counts.assign(grid.size(), 0);
        PerpetuitySampler sampler(system, opts);
        for (std::size_t i = b; i < e; ++i) {
            RngStream rng(seed, component_stream(component, i));
            const StationarySample s = sampler.sample(rng);
            acc.total_terms += s.terms_used;
            count_exceedance(s.value, grid, acc.counts);
            acc.max_value = acc.has_max ? max(acc.max_value, s.value) : s.value;
            acc.has_max = true;
            if (i == 0) {
                acc.first = s.value;
                acc.has_first = true;
            }
        }
    });
    StationaryAccum total;
    total.counts.assign(grid.size(), 0);
    for (const auto& p : parts) total.merge(p);
    return total;
}

struct HorizonAccum {
    std::vector<std::size_t> counts;
    std::vector<std::size_t> pos_counts;  // index k = 1..n-1
    std::vector<std::size_t> enum_hits;
    std::size_t enum_miss = 0;
    LogReal max_value;
    bool has_max = false;
    LogReal first;
    bool has_first = false;
};

// Nearest enumeration state within relative tolerance; the sampled value is
// an exact float composition of the same atoms, but association order
// differs from the enumerator's, so equality only holds to rounding.
std::optional<std::size_t> match_enum_state(const std::vector<double>& values,
                                            double v) {
    if (values.empty() || !std::isfinite(v)) return std::nullopt;
    auto accept = [&](std::size_t idx) {
        const double w = values[idx];
        const double tol =
            1e-9 * std::max({1.0, std::fabs(v), std::fabs(w)});
        return std::fabs(w - v) <= tol;
    };
    const auto it = std::lower_bound(values.begin(), values.end(), v);
    std::optional<std::size_t> best;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto cand : {it, it == values.begin() ? values.end() : std::prev(it)}) {
        if (cand == values.end()) continue;
        const auto idx = static_cast<std::size_t>(cand - values.begin());
        const double gap = std::fabs(values[idx] - v);
        if (accept(idx) && gap < best_gap) {
            best = idx;
            best_gap = gap;
        }
    }
    return best;
}

struct SupWalkAccum {
    std::vector<std::size_t> counts;
    std::size_t total_steps = 0;
    double max_m = -std::numeric_limits<double>::infinity();
    double first_m = 0.0;
    bool has_first = false;
};

// ---------------------------------------------------------------------------
// Fixed diagnostics battery: canonical members and non-members of the heavy
// tail classes, checked by the numeric class diagnostics.

GridDensity pareto_cube_density(double hi, double dln) {
    const std::size_t n =
        static_cast<std::size_t>(std::ceil(std::log(hi) / dln)) + 1;
    GridDensity d;
    d.xs = log_spaced(1.0, hi, n);
    d.fs.reserve(n);
    for (double x : d.xs) d.fs.push_back(2.0 / (x * x * x));
    return d;
}

GridDensity exponential_density(double hi, double step) {
    const std::size_t n = static_cast<std::size_t>(std::ceil(hi / step)) + 1;
    GridDensity d;
    d.xs = linear_spaced(0.0, hi, n);
    d.fs.reserve(n);
    for (double x : d.xs) d.fs.push_back(std::exp(-x));
    return d;
}

std::vector<DiagTable> run_class_diagnostics() {
    std::vector<DiagTable> tables;

    {
        // Power tail with the same slowly varying profile the sampled laws
        // use; shift-insensitivity ratios must climb to 1.
        const TailFn tail = [](double x) { return std::pow(x + 4.0, -2.0); };
        LongTailReport rep =
            check_long_tailed(tail, {1.0, 5.0, 10.0}, log_spaced(10.0, 400.0, 25));
        DiagTable t;
        t.name = "long-tail-pareto";
        t.rows = std::move(rep.rows);
        t.verdict = std::move(rep.verdict);
        t.terminal_value = std::numeric_limits<double>::quiet_NaN();
        tables.push_back(std::move(t));
    }
    {
        // Pareto(2) on [1, 1e10]: two-fold convolution ratio tends to 2.
        SubexpReport rep =
            check_subexponential(pareto_cube_density(1e10, 5e-5), 1e6);
        DiagTable t;
        t.name = "subexp-pareto";
        t.verdict = rep.verdict;
        t.terminal_value = rep.ratios.back();
        t.rows.reserve(rep.xs.size());
        for (std::size_t i = 0; i < rep.xs.size(); ++i) {
            t.rows.push_back({rep.xs[i], 0.0, rep.ratios[i], 2.0, rep.verdict});
        }
        tables.push_back(std::move(t));
    }
    {
        // Unit exponential: the same ratio grows like 1 + x instead.
        SubexpReport rep =
            check_subexponential(exponential_density(48.0, 2e-4), 40.0);
        DiagTable t;
        t.name = "subexp-exponential";
        t.verdict = rep.verdict;
        t.terminal_value = rep.ratios.back();
        t.rows.reserve(rep.xs.size());
        for (std::size_t i = 0; i < rep.xs.size(); ++i) {
            t.rows.push_back({rep.xs[i], 0.0, rep.ratios[i], 2.0, rep.verdict});
        }
        tables.push_back(std::move(t));
    }
    {
        // Ratio growth bound on the power tail: violations at small scales,
        // none once both points clear the threshold.
        const TailFn tail = [](double x) { return std::pow(x + 4.0, -2.0); };
        const std::vector<double> values{1.0, 2.0, 5.0, 10.0, 12.0,
                                         16.0, 20.0, 35.0, 50.0};
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (std::size_t j = i + 1; j < values.size(); ++j) {
                pairs.emplace_back(values[i], values[j]);
            }
        }
        PotterReport rep = potter_check(tail, 2.0, 0.1, pairs);
        DiagTable t;
        t.name = "potter-pareto";
        t.rows = std::move(rep.rows);
        t.threshold_present = rep.threshold.has_value();
        t.terminal_value = rep.threshold
                               ? *rep.threshold
                               : std::numeric_limits<double>::quiet_NaN();
        t.verdict = t.threshold_present ? "bound holds above threshold"
                                        : "no admissible threshold";
        tables.push_back(std::move(t));
    }
    {
        // Gaussian-type tail: the ratio bound fails at every scale.
        const TailFn tail = [](double x) { return std::exp(-x * x); };
        std::vector<std::pair<double, double>> pairs;
        for (int x = 1; x <= 6; ++x) {
            pairs.emplace_back(static_cast<double>(x),
                               static_cast<double>(x) + 1.0);
        }
        PotterReport rep = potter_check(tail, 2.0, 0.1, pairs);
        DiagTable t;
        t.name = "potter-gaussian";
        t.rows = std::move(rep.rows);
        t.threshold_present = rep.threshold.has_value();
        t.terminal_value = rep.threshold
                               ? *rep.threshold
                               : std::numeric_limits<double>::quiet_NaN();
        t.verdict = t.threshold_present ? "bound holds above threshold"
                                        : "no admissible threshold";
        tables.push_back(std::move(t));
    }
    return tables;
}

// ---------------------------------------------------------------------------
// Check evaluation.

std::string brief(double v) { return format_double(v); }

std::string brief_log_real(const LogReal& v) {
    if (v.is_zero()) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%sexp(%.9g)", v.sign > 0 ? "" : "-",
                  v.log_mag);
    return buf;
}

std::optional<std::size_t> grid_index(const TailCurve& curve, double u) {
    const auto it = std::find(curve.grid.begin(), curve.grid.end(), u);
    if (it == curve.grid.end()) return std::nullopt;
    return static_cast<std::size_t>(it - curve.grid.begin());
}

// empirical/theory ratio at one grid slot; NaN when the regime has no point
// value or the threshold is absent.
double ratio_at(const TailCurve& curve, double u) {
    const auto idx = grid_index(curve, u);
    if (!idx || curve.theory.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double th = curve.theory[*idx];
    if (!std::isfinite(th) || th <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return curve.p_hat[*idx] / th;
}

const DiagTable* find_table(const std::vector<DiagTable>& tables,
                            const std::string& name) {
    for (const auto& t : tables) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

CheckResult eval_check(const CheckSpec& c, const ScenarioResult& r) {
    CheckResult out;
    out.name = c.type;
    if (!c.table.empty()) {
        out.name += "[" + c.table + "]";
    } else if (c.type == "ratio-band" || c.type == "factor-band") {
        out.name += "[u=" + brief(c.u) + "]";
    }
    out.pass = false;

    if (c.type == "stationary-value") {
        const double first = r.first_sample.to_double();
        const double worst = r.max_sample.to_double();
        out.pass = std::fabs(first - c.expect) <= c.tol &&
                   std::fabs(worst - c.expect) <= c.tol;
        out.detail = "sample=" + brief(first) + " max=" + brief(worst) +
                     " expect=" + brief(c.expect) + " tol=" + brief(c.tol);
        return out;
    }
    if (c.type == "max-below") {
        const LogReal cap = LogReal::from_double(c.bound + c.slack);
        out.pass = compare(r.max_sample, cap) <= 0;
        out.detail = "max=" + brief_log_real(r.max_sample) + " bound=" +
                     brief(c.bound) + " slack=" + brief(c.slack);
        return out;
    }
    if (c.type == "sandwich-containment") {
        if (r.curve.theory_lo.empty()) {
            out.detail = "no theory band attached";
            return out;
        }
        std::size_t bad = 0;
        std::string first_bad;
        for (std::size_t i = 0; i < r.curve.grid.size(); ++i) {
            const double lo = c.lo_scale * r.curve.theory_lo[i];
            const double hi = c.hi_scale * r.curve.theory_hi[i];
            const bool ok =
                r.curve.ci_lo[i] <= hi && lo <= r.curve.ci_hi[i];
            if (!ok && bad++ == 0) {
                first_bad = "u=" + brief(r.curve.grid[i]) + " ci=[" +
                            brief(r.curve.ci_lo[i]) + "," +
                            brief(r.curve.ci_hi[i]) + "] band=[" + brief(lo) +
                            "," + brief(hi) + "]";
            }
        }
        out.pass = bad == 0;
        out.detail = out.pass ? "all " + std::to_string(r.curve.grid.size()) +
                                    " intervals intersect the scaled band"
                              : first_bad;
        return out;
    }
    if (c.type == "ratio-band") {
        const double ratio = ratio_at(r.curve, c.u);
        if (!std::isfinite(ratio)) {
            out.detail = "no point prediction at u=" + brief(c.u);
            return out;
        }
        out.pass = ratio >= c.lo && ratio <= c.hi;
        out.detail = "ratio=" + brief(ratio) + " band=[" + brief(c.lo) + "," +
                     brief(c.hi) + "]";
        return out;
    }
    if (c.type == "ratio-monotone-to-one" || c.type == "ratio-nondecreasing") {
        const std::vector<double>& us =
            c.thresholds.empty() ? r.curve.grid : c.thresholds;
        std::vector<double> ratios;
        std::string list;
        for (double u : us) {
            const double ratio = ratio_at(r.curve, u);
            if (!std::isfinite(ratio)) {
                out.detail = "no point prediction at u=" + brief(u);
                return out;
            }
            ratios.push_back(ratio);
            if (!list.empty()) list += ",";
            list += brief(ratio);
        }
        if (ratios.size() < 2) {
            out.detail = "needs at least two thresholds";
            return out;
        }
        bool ok = true;
        for (std::size_t i = 1; i < ratios.size(); ++i) {
            if (c.type == "ratio-monotone-to-one") {
                // distance to 1 may stay flat but must not grow
                if (std::fabs(ratios[i] - 1.0) >
                    std::fabs(ratios[i - 1] - 1.0) + 1e-12) {
                    ok = false;
                }
            } else if (ratios[i] < ratios[i - 1] - 1e-12) {
                ok = false;
            }
        }
        out.pass = ok;
        out.detail = "ratios=[" + list + "]";
        return out;
    }
    if (c.type == "factor-band") {
        if (r.curve_independent.grid.empty()) {
            out.detail = "no second coupling curve";
            return out;
        }
        try {
            const FactorEstimate est =
                tail_factor(r.curve_independent, r.curve, c.u);
            out.pass = est.lo >= c.lo && est.hi <= c.hi;
            out.detail = "factor=" + brief(est.factor) + " ci=[" +
                         brief(est.lo) + "," + brief(est.hi) + "] band=[" +
                         brief(c.lo) + "," + brief(c.hi) + "]";
        } catch (const Error& e) {
            out.detail = e.what();
        }
        return out;
    }
    if (c.type == "tv-enumeration") {
        if (!std::isfinite(r.tv_distance)) {
            out.detail = "no enumeration available";
            return out;
        }
        out.pass = r.tv_distance <= c.bound;
        out.detail = "tv=" + brief(r.tv_distance) + " bound=" + brief(c.bound);
        return out;
    }
    if (c.type == "diag-verdict") {
        const DiagTable* t = find_table(r.tables, c.table);
        if (!t) {
            out.detail = "no table named '" + c.table + "'";
            return out;
        }
        out.pass = t->verdict == c.expect_text;
        out.detail = "verdict='" + t->verdict + "' expect='" + c.expect_text + "'";
        return out;
    }
    if (c.type == "diag-terminal-band") {
        const DiagTable* t = find_table(r.tables, c.table);
        if (!t) {
            out.detail = "no table named '" + c.table + "'";
            return out;
        }
        out.pass = std::isfinite(t->terminal_value) &&
                   t->terminal_value >= c.lo && t->terminal_value <= c.hi;
        out.detail = "terminal=" + brief(t->terminal_value) + " band=[" +
                     brief(c.lo) + "," + brief(c.hi) + "]";
        return out;
    }
    if (c.type == "potter-threshold") {
        const DiagTable* t = find_table(r.tables, c.table);
        if (!t) {
            out.detail = "no table named '" + c.table + "'";
            return out;
        }
        const bool want_present = c.expect_text == "present";
        out.pass = t->threshold_present == want_present;
        out.detail = t->threshold_present
                         ? "threshold=" + brief(t->terminal_value)
                         : "no threshold";
        out.detail += " expect=" + c.expect_text;
        return out;
    }
    out.detail = "unknown check type";
    return out;
}

// ---------------------------------------------------------------------------
// Summary and artifacts.

json log_real_json(const LogReal& v) {
    return json{{"log_mag", v.is_zero() ? 0.0 : v.log_mag}, {"sign", v.sign}};
}

std::string iso_utc_now() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ArtifactWriter {
    fs::path dir;
    bool enabled = true;
    std::vector<std::string> names;       // file names, insertion order
    std::vector<std::string>* paths = nullptr;  // full paths, for the result

    void emit(const std::string& name, const std::string& content) {
        if (!enabled) return;
        write_text_atomic(dir / name, content);
        names.push_back(name);
        if (paths) paths->push_back((dir / name).string());
    }
};

PlotSeries curve_series(const TailCurve& curve, const std::string& label,
                        const std::string& color) {
    PlotSeries s;
    s.label = label;
    s.color = color;
    s.xs = curve.grid;
    s.ys = curve.p_hat;
    s.y_lo = curve.ci_lo;
    s.y_hi = curve.ci_hi;
    return s;
}

std::string tail_curve_svg(const TailCurve& curve, const std::string& title) {
    std::vector<PlotSeries> series;
    series.push_back(curve_series(curve, "empirical", "#1f6feb"));
    bool any_point = false;
    for (double th : curve.theory) {
        if (std::isfinite(th) && th > 0.0) any_point = true;
    }
    if (any_point) {
        PlotSeries th;
        th.label = "prediction";
        th.color = "#d62728";
        th.xs = curve.grid;
        th.ys = curve.theory;
        th.draw_markers = false;
        series.push_back(std::move(th));
    }
    std::vector<PlotBand> bands;
    bool any_band = false;
    for (double hi : curve.theory_hi) {
        if (std::isfinite(hi) && hi > 0.0) any_band = true;
    }
    if (any_band) {
        PlotBand band;
        band.label = "theory band";
        band.xs = curve.grid;
        band.lo = curve.theory_lo;
        band.hi = curve.theory_hi;
        bands.push_back(std::move(band));
    }
    PlotOptions opts;
    opts.title = title;
    opts.x_label = "log threshold u";
    opts.y_label = "exceedance probability";
    opts.log_y = true;
    return render_plot(series, bands, opts);
}

}  // namespace

std::string mode_name(ScenarioMode mode) {
    switch (mode) {
        case ScenarioMode::Stationary: return "stationary";
        case ScenarioMode::FiniteHorizon: return "finite-horizon";
        case ScenarioMode::SupWalk: return "sup-walk";
        case ScenarioMode::Diagnostics: return "diagnostics";
        case ScenarioMode::Example34: return "example-3-4";
        case ScenarioMode::BoundedExample: return "bounded-example";
    }
    throw DomainError("mode_name: unknown mode");
}

InputLaw build_law(const LawConfig& config) {
    switch (config.family) {
        case Family::ParetoLog:
            return make_pareto_log(config.alpha, config.shift, config.coupling);
        case Family::WeibullLog:
            return make_weibull_log(config.beta, config.scale, config.shift,
                                    config.coupling);
        case Family::DiscreteFinite:
            return make_discrete_finite(config.atoms);
        case Family::Deterministic:
            return make_deterministic(config.a, config.b, config.d);
        case Family::IndicatorCounter: {
            if (!config.base) {
                throw ConfigError("indicator_counter law requires a base law");
            }
            return make_indicator_counter(build_law(*config.base));
        }
        default:
            throw ConfigError("law family cannot be built from a config");
    }
}

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_object(j, "");
    allow_keys(j, "",
               {"schema_version", "name", "mode", "law", "system", "grid",
                "n_samples", "seed", "workers", "horizon", "rel_tol_log",
                "max_terms", "guard_log", "max_steps", "regime",
                "trajectory_steps", "out", "checks"});

    Scenario s;
    const double version = get_number(j, "", "schema_version");
    if (version != 1.0) fail_field("schema_version", "this build reads version 1");
    s.schema_version = 1;

    s.name = get_string(j, "", "name");
    if (!valid_name(s.name)) {
        fail_field("name", "use 1-128 characters from [A-Za-z0-9._-]");
    }
    s.mode = parse_mode(get_string(j, "", "mode"));

    const bool sampled = s.mode != ScenarioMode::Diagnostics;

    if (j.contains("system")) {
        if (s.mode == ScenarioMode::SupWalk || s.mode == ScenarioMode::Example34 ||
            s.mode == ScenarioMode::Diagnostics) {
            fail_field("system", "not available in mode " + mode_name(s.mode));
        }
        const json& sys = j.at("system");
        require_object(sys, "system");
        const std::string kind = get_string(sys, "system", "kind");
        if (kind == "affine") {
            allow_keys(sys, "system", {"kind"});
            s.system_kind = SystemKind::Affine;
        } else if (kind == "arch1") {
            allow_keys(sys, "system", {"kind", "a1", "a2", "d"});
            s.system_kind = SystemKind::Arch1;
            s.arch_a1 = get_number(sys, "system", "a1");
            s.arch_a2 = get_number(sys, "system", "a2");
            s.arch_d = get_number(sys, "system", "d");
        } else {
            fail_field("system.kind", "expected 'affine' or 'arch1'");
        }
    }

    if (j.contains("law")) {
        if (s.mode == ScenarioMode::Diagnostics) {
            fail_field("law", "diagnostics scenarios take no law");
        }
        if (s.system_kind == SystemKind::Arch1) {
            fail_field("law", "arch1 systems carry their own envelope law");
        }
        s.law = parse_law(j.at("law"), "law");
        s.has_law = true;
    } else if (sampled && s.system_kind != SystemKind::Arch1) {
        fail_field("law", "required object missing");
    }

    if (s.mode == ScenarioMode::Example34) {
        if (s.law.family != Family::ParetoLog && s.law.family != Family::WeibullLog) {
            fail_field("law.family",
                       "coupling comparison needs a continuous family "
                       "(pareto_log or weibull_log)");
        }
    }

    if (j.contains("grid")) {
        if (!sampled) fail_field("grid", "not available in diagnostics mode");
        s.grid = get_number_array(j, "", "grid");
        if (s.grid.empty()) fail_field("grid", "expected a non-empty array");
        for (std::size_t i = 1; i < s.grid.size(); ++i) {
            if (!(s.grid[i] > s.grid[i - 1])) {
                fail_field("grid", "thresholds must be strictly increasing");
            }
        }
    } else if (sampled) {
        s.grid = default_tail_grid();
    }

    if (sampled) {
        s.n_samples = get_count(j, "", "n_samples");
        if (s.n_samples == 0) fail_field("n_samples", "needs at least one sample");
    } else if (j.contains("n_samples")) {
        fail_field("n_samples", "not available in diagnostics mode");
    }

    s.seed = get_count(j, "", "seed", std::size_t{1});
    const std::size_t workers = get_count(j, "", "workers", std::size_t{1});
    if (workers < 1 || workers > 512) fail_field("workers", "expected 1..512");
    s.workers = static_cast<int>(workers);

    if (j.contains("horizon")) {
        if (s.mode != ScenarioMode::FiniteHorizon) {
            fail_field("horizon", "only finite-horizon scenarios take a horizon");
        }
        const json& h = j.at("horizon");
        require_object(h, "horizon");
        allow_keys(h, "horizon", {"n", "r0", "w"});
        s.horizon_n = static_cast<int>(get_count(h, "horizon", "n"));
        s.horizon_r0 = get_number(h, "horizon", "r0", 0.0);
        s.horizon_w = get_number(h, "horizon", "w", 0.0);
        if (s.horizon_w < 0.0 || s.horizon_w > 1.0) {
            fail_field("horizon.w", "expected a probability in [0, 1]");
        }
    } else if (s.mode == ScenarioMode::FiniteHorizon) {
        fail_field("horizon", "required object missing");
    }

    s.rel_tol_log = get_number(j, "", "rel_tol_log", 50.0);
    if (!(s.rel_tol_log > 0.0)) fail_field("rel_tol_log", "expected > 0");
    s.max_terms = get_count(j, "", "max_terms", std::size_t{1'000'000});
    if (s.max_terms == 0) fail_field("max_terms", "expected >= 1");
    s.guard_log = get_number(j, "", "guard_log", 60.0);
    if (!(s.guard_log > 0.0)) fail_field("guard_log", "expected > 0");
    s.max_steps = get_count(j, "", "max_steps", std::size_t{50'000'000});
    if (s.max_steps == 0) fail_field("max_steps", "expected >= 1");

    if (j.contains("regime")) {
        const json& rg = j.at("regime");
        require_object(rg, "regime");
        allow_keys(rg, "regime", {"kind", "aux"});
        const std::string kind = get_string(rg, "regime", "kind");
        if (kind == "general") {
            s.regime.kind = RegimeKind::GeneralBounds;
        } else if (kind == "positive-bd") {
            s.regime.kind = RegimeKind::PositiveBD;
        } else if (kind == "b-dominates") {
            s.regime.kind = RegimeKind::BDominates;
        } else if (kind == "a-dominates") {
            s.regime.kind = RegimeKind::ADominates;
        } else {
            fail_field("regime.kind",
                       "expected 'general', 'positive-bd', 'b-dominates' or "
                       "'a-dominates'");
        }
        if (rg.contains("aux")) {
            const double aux = get_number(rg, "regime", "aux");
            if (aux < 0.0 || aux > 1.0) {
                fail_field("regime.aux", "expected a probability in [0, 1]");
            }
            s.regime.aux = aux;
        }
        s.regime_auto = false;
    }

    s.trajectory_steps = get_count(j, "", "trajectory_steps", std::size_t{0});
    if (s.trajectory_steps > 0 && !sampled) {
        fail_field("trajectory_steps", "not available in diagnostics mode");
    }
    s.out_dir = get_string(j, "", "out", std::string());

    if (j.contains("checks")) {
        const json& arr = j.at("checks");
        if (!arr.is_array()) fail_field("checks", "expected an array");
        std::size_t idx = 0;
        for (const json& c : arr) {
            const std::string ctx = "checks[" + std::to_string(idx) + "]";
            CheckSpec spec = parse_check(c, ctx);
            if (!check_allowed(s.mode, spec.type)) {
                fail_field(ctx + ".type", "check '" + spec.type +
                                              "' is not available in mode " +
                                              mode_name(s.mode));
            }
            s.checks.push_back(std::move(spec));
            ++idx;
        }
    }

    if (s.mode == ScenarioMode::BoundedExample) {
        const bool has_bound_check =
            std::any_of(s.checks.begin(), s.checks.end(),
                        [](const CheckSpec& c) { return c.type == "max-below"; });
        if (!has_bound_check) {
            fail_field("checks", "bounded-example scenarios need a max-below check");
        }
    }

    return s;
}

const std::vector<BuiltinScenario>& builtin_scenarios() {
    static const std::vector<BuiltinScenario> catalog = {
        {"deterministic-smoke",
         "Fixed map t -> t/2 + 1: the stationary value is exactly 2, pinning "
         "the backward sampler to machine precision.",
         R"({
  "schema_version": 1,
  "name": "deterministic-smoke",
  "mode": "stationary",
  "law": {"family": "deterministic", "a": 0.5, "b": 1.0, "d": 0.0},
  "n_samples": 1000,
  "grid": [0.0, 0.69, 0.7],
  "seed": 1,
  "checks": [
    {"type": "stationary-value", "expect": 2.0, "tol": 1e-12}
  ]
})"},
        {"enumeration-check",
         "Ten-step chain over a two-atom coin law, Monte Carlo against exact "
         "state enumeration in total variation.",
         R"({
  "schema_version": 1,
  "name": "enumeration-check",
  "mode": "finite-horizon",
  "law": {"family": "discrete_finite", "atoms": [
    {"a": 0.5, "b": 0.0, "d": 0.0, "prob": 0.5},
    {"a": 0.5, "b": 1.0, "d": 0.0, "prob": 0.5}
  ]},
  "horizon": {"n": 10, "r0": 0.0, "w": 0.0},
  "n_samples": 1000000,
  "grid": [-0.9163, -0.1054, 0.3365],
  "seed": 7,
  "checks": [
    {"type": "tv-enumeration", "bound": 0.018}
  ]
})"},
        {"thm33-finite-horizon",
         "Three-step tail of the power-tail chain against the (w + n) * "
         "P[A v B > e^u] prediction.",
         R"({
  "schema_version": 1,
  "name": "thm33-finite-horizon",
  "mode": "finite-horizon",
  "law": {"family": "pareto_log", "alpha": 2.0, "shift": 4.0, "coupling": "b_equals_a"},
  "horizon": {"n": 3, "r0": 1.0, "w": 0.0},
  "n_samples": 10000000,
  "grid": [30.0, 60.0, 90.0],
  "seed": 101,
  "checks": [
    {"type": "ratio-band", "u": 60.0, "lo": 0.85, "hi": 1.15}
  ]
})"},
        {"thm25-sup-walk",
         "All-time maximum of the perturbed log walk against the integrated "
         "tail prediction; deep thresholds expose the stopping-rule bias, "
         "which the run reports per threshold.",
         R"({
  "schema_version": 1,
  "name": "thm25-sup-walk",
  "mode": "sup-walk",
  "law": {"family": "pareto_log", "alpha": 2.0, "shift": 4.0, "coupling": "b_equals_a"},
  "n_samples": 10000000,
  "grid": [50.0, 100.0, 196.0],
  "guard_log": 60.0,
  "seed": 2025,
  "checks": [
    {"type": "ratio-band", "u": 196.0, "lo": 0.7, "hi": 1.3},
    {"type": "ratio-monotone-to-one", "thresholds": [50.0, 100.0, 196.0]}
  ]
})"},
        {"thm31-positive-bd",
         "Stationary tail of the power-tail chain with B - D > 0: Wilson "
         "intervals against the integrated-tail prediction across three "
         "decades of thresholds.",
         R"({
  "schema_version": 1,
  "name": "thm31-positive-bd",
  "mode": "stationary",
  "law": {"family": "pareto_log", "alpha": 2.0, "shift": 4.0, "coupling": "b_equals_a"},
  "n_samples": 1000000,
  "grid": [50.0, 100.0, 200.0],
  "seed": 31,
  "checks": [
    {"type": "sandwich-containment", "lo_scale": 0.5, "hi_scale": 1.5},
    {"type": "ratio-nondecreasing", "thresholds": [50.0, 100.0, 200.0]}
  ]
})"},
        {"example-3-4",
         "The two couplings of the power-tail law side by side: B = A versus "
         "independent B doubles the stationary tail, factor -> 2.",
         R"({
  "schema_version": 1,
  "name": "example-3-4",
  "mode": "example-3-4",
  "law": {"family": "pareto_log", "alpha": 2.0, "shift": 4.0},
  "n_samples": 1000000,
  "grid": [25.0, 50.0, 100.0],
  "seed": 34,
  "checks": [
    {"type": "factor-band", "u": 100.0, "lo": 1.5, "hi": 2.5}
  ]
})"},
        {"bounded-example",
         "Heavy-tailed multiplier with a compensating additive term: the "
         "stationary value never exceeds 1 even though A has a power tail.",
         R"({
  "schema_version": 1,
  "name": "bounded-example",
  "mode": "bounded-example",
  "law": {"family": "indicator_counter", "base": {"family": "pareto_log", "alpha": 2.0, "shift": 4.0, "coupling": "b_equals_a"}},
  "n_samples": 1000000,
  "grid": [0.0, 25.0],
  "seed": 73,
  "checks": [
    {"type": "max-below", "bound": 1.0, "slack": 1e-9}
  ]
})"},
        {"class-diagnostics",
         "Numeric membership checks for the heavy-tail classes: shift "
         "insensitivity, two-fold convolution ratio, and the ratio growth "
         "bound, on canonical members and non-members.",
         R"({
  "schema_version": 1,
  "name": "class-diagnostics",
  "mode": "diagnostics",
  "seed": 9,
  "checks": [
    {"type": "diag-verdict", "table": "long-tail-pareto", "expect_text": "consistent with L"},
    {"type": "diag-verdict", "table": "subexp-pareto", "expect_text": "consistent with S"},
    {"type": "diag-terminal-band", "table": "subexp-pareto", "lo": 1.9, "hi": 2.1},
    {"type": "diag-verdict", "table": "subexp-exponential", "expect_text": "not consistent with S"},
    {"type": "potter-threshold", "table": "potter-pareto", "expect_text": "present"},
    {"type": "potter-threshold", "table": "potter-gaussian", "expect_text": "absent"}
  ]
})"},
    };
    return catalog;
}

Scenario load_scenario(const std::string& path_or_builtin) {
    std::error_code ec;
    if (fs::exists(path_or_builtin, ec)) {
        std::ifstream in(path_or_builtin, std::ios::binary);
        if (!in) throw IoError("cannot open config file " + path_or_builtin);
        std::ostringstream buf;
        buf << in.rdbuf();
        if (in.bad()) throw IoError("cannot read config file " + path_or_builtin);
        return parse_scenario(buf.str());
    }
    for (const BuiltinScenario& b : builtin_scenarios()) {
        if (b.name == path_or_builtin) return parse_scenario(b.config_json);
    }
    throw ConfigError("no config file or built-in scenario named '" +
                      path_or_builtin + "'");
}

bool ScenarioResult::all_passed() const {
    for (const CheckResult& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();

    ScenarioResult r;
    r.name = scenario.name;
    r.mode = scenario.mode;
    r.seed = options.seed.value_or(scenario.seed);
    r.workers = options.workers.value_or(scenario.workers);
    if (r.workers < 1 || r.workers > 512) {
        throw ConfigError("workers: expected 1..512");
    }

    InputLaw law;
    LipschitzSystem system;
    if (scenario.system_kind == SystemKind::Arch1) {
        system = make_arch1(scenario.arch_a1, scenario.arch_a2, scenario.arch_d);
        law = system.law;
    } else if (scenario.has_law) {
        law = build_law(scenario.law);
        system = make_affine_system(law);
    }

    json summary;
    summary["schema_version"] = 1;
    summary["name"] = scenario.name;
    summary["mode"] = mode_name(scenario.mode);
    summary["seed"] = r.seed;

    const std::vector<double>& grid = scenario.grid;
    const std::size_t n = scenario.n_samples;

    // Filled by the finite-horizon branch when the law has finite support;
    // consumed by the artifact block.
    Enumeration enumeration;
    bool have_enumeration = false;

    switch (scenario.mode) {
        case ScenarioMode::Stationary:
        case ScenarioMode::BoundedExample: {
            PerpetuityOptions popts;
            popts.rel_tol_log = scenario.mode == ScenarioMode::Stationary
                                    ? stationary_depth(scenario.rel_tol_log, grid)
                                    : scenario.rel_tol_log;
            popts.max_terms = scenario.max_terms;
            const StationaryAccum acc =
                sample_stationary(system, grid, n, r.seed, kStreamStationary,
                                  r.workers, popts);
            r.curve = tail_curve_from_counts(grid, n, acc.counts);
            const Regime regime =
                scenario.regime_auto ? default_regime(law) : scenario.regime;
            attach_stationary_theory(r.curve, law, regime);
            r.max_sample = acc.max_value;
            r.first_sample = acc.first;
            r.mean_terms =
                static_cast<double>(acc.total_terms) / static_cast<double>(n);
            summary["law"] = law.name;
            summary["system"] = system.name;
            summary["regime"] = r.curve.regime;
            summary["resolution_log"] = popts.rel_tol_log;
            break;
        }
        case ScenarioMode::FiniteHorizon: {
            const std::size_t steps = static_cast<std::size_t>(scenario.horizon_n);
            // Enumerate first when the law has finite support and the state
            // count stays within budget; the Monte Carlo pass then scores
            // every sample against the exact states.
            if (!law.atoms.empty()) {
                double states = 1.0;
                for (std::size_t k = 0; k < steps; ++k) {
                    states *= static_cast<double>(law.atoms.size());
                    if (states > static_cast<double>(1u << 20)) break;
                }
                if (states <= static_cast<double>(1u << 20)) {
                    enumeration =
                        enumerate_finite(system, scenario.horizon_r0, steps);
                    have_enumeration = true;
                }
            }

            const auto ranges = shard(n, r.workers);
            std::vector<HorizonAccum> parts(ranges.size());
            const LogReal r0 = LogReal::from_double(scenario.horizon_r0);
            run_sharded(ranges, [&](std::size_t slot, std::size_t b, std::size_t e) {
                HorizonAccum& acc = parts[slot];
                acc.counts.assign(grid.size(), 0);
                acc.pos_counts.assign(steps, 0);
                if (have_enumeration) {
                    acc.enum_hits.assign(enumeration.values.size(), 0);
                }
                for (std::size_t i = b; i < e; ++i) {
                    RngStream rng(r.seed,
                                  component_stream(kStreamFiniteHorizon, i));
                    const LogReal v = forward_iterate(
                        system, rng, r0, steps,
                        [&](std::size_t k, const LogReal& state) {
                            if (k < steps && state.sign > 0) ++acc.pos_counts[k];
                        });
                    count_exceedance(v, grid, acc.counts);
                    acc.max_value =
                        acc.has_max ? max(acc.max_value, v) : v;
                    acc.has_max = true;
                    if (i == 0) {
                        acc.first = v;
                        acc.has_first = true;
                    }
                    if (have_enumeration) {
                        const auto idx =
                            match_enum_state(enumeration.values, v.to_double());
                        if (idx) {
                            ++acc.enum_hits[*idx];
                        } else {
                            ++acc.enum_miss;
                        }
                    }
                }
            });
            HorizonAccum total;
            total.counts.assign(grid.size(), 0);
            total.pos_counts.assign(steps, 0);
            if (have_enumeration) {
                total.enum_hits.assign(enumeration.values.size(), 0);
            }
            for (const auto& p : parts) {
                for (std::size_t i = 0; i < total.counts.size(); ++i) {
                    total.counts[i] += p.counts[i];
                }
                for (std::size_t i = 0; i < total.pos_counts.size(); ++i) {
                    total.pos_counts[i] += p.pos_counts[i];
                }
                if (have_enumeration) {
                    for (std::size_t i = 0; i < total.enum_hits.size(); ++i) {
                        total.enum_hits[i] += p.enum_hits[i];
                    }
                    total.enum_miss += p.enum_miss;
                }
                if (p.has_max) {
                    total.max_value = total.has_max
                                          ? max(total.max_value, p.max_value)
                                          : p.max_value;
                    total.has_max = true;
                }
                if (p.has_first && !total.has_first) {
                    total.first = p.first;
                    total.has_first = true;
                }
            }

            // P[R_k > 0] estimates for the sandwich constants: index 0 is
            // the deterministic start, later indices come from the visitor.
            std::vector<double> r_pos(steps, 0.0);
            if (steps > 0) r_pos[0] = scenario.horizon_r0 > 0.0 ? 1.0 : 0.0;
            for (std::size_t k = 1; k < steps; ++k) {
                r_pos[k] = static_cast<double>(total.pos_counts[k]) /
                           static_cast<double>(n);
            }

            r.curve = tail_curve_from_counts(grid, n, total.counts);
            const Regime regime =
                scenario.regime_auto ? default_regime(law) : scenario.regime;
            attach_finite_horizon_theory(r.curve, law, scenario.horizon_n,
                                         scenario.horizon_w, regime, r_pos);
            r.max_sample = total.max_value;
            r.first_sample = total.first;
            r.mean_terms = static_cast<double>(steps);

            summary["law"] = law.name;
            summary["system"] = system.name;
            summary["regime"] = r.curve.regime;
            summary["horizon"] = json{{"n", scenario.horizon_n},
                                      {"r0", scenario.horizon_r0},
                                      {"w", scenario.horizon_w}};
            summary["positivity"] = r_pos;
            if (have_enumeration) {
                const double inv = 1.0 / static_cast<double>(n);
                double l1 = static_cast<double>(total.enum_miss) * inv;
                for (std::size_t i = 0; i < enumeration.values.size(); ++i) {
                    l1 += std::fabs(static_cast<double>(total.enum_hits[i]) * inv -
                                    enumeration.probs[i]);
                }
                r.tv_distance = 0.5 * l1;
                summary["tv_distance"] = r.tv_distance;
                summary["enumeration_states"] = enumeration.values.size();
                summary["unmatched_mass"] =
                    static_cast<double>(total.enum_miss) / static_cast<double>(n);
            }
            break;
        }
        case ScenarioMode::SupWalk: {
            SupWalkOptions wopts;
            wopts.guard_log = scenario.guard_log;
            wopts.max_steps = scenario.max_steps;
            const auto ranges = shard(n, r.workers);
            std::vector<SupWalkAccum> parts(ranges.size());
            run_sharded(ranges, [&](std::size_t slot, std::size_t b, std::size_t e) {
                SupWalkAccum& acc = parts[slot];
                acc.counts.assign(grid.size(), 0);
                for (std::size_t i = b; i < e; ++i) {
                    RngStream rng(r.seed, component_stream(kStreamSupWalk, i));
                    const SupWalkSample s = sample_sup_walk(law, rng, wopts);
                    acc.total_steps += s.steps;
                    for (std::size_t g = 0; g < grid.size(); ++g) {
                        if (s.m > grid[g]) {
                            ++acc.counts[g];
                        } else {
                            break;
                        }
                    }
                    if (s.m > acc.max_m) acc.max_m = s.m;
                    if (i == 0) {
                        acc.first_m = s.m;
                        acc.has_first = true;
                    }
                }
            });
            SupWalkAccum total;
            total.counts.assign(grid.size(), 0);
            for (const auto& p : parts) {
                for (std::size_t i = 0; i < total.counts.size(); ++i) {
                    total.counts[i] += p.counts[i];
                }
                total.total_steps += p.total_steps;
                total.max_m = std::max(total.max_m, p.max_m);
                if (p.has_first && !total.has_first) {
                    total.first_m = p.first_m;
                    total.has_first = true;
                }
            }
            r.curve = tail_curve_from_counts(grid, n, total.counts);
            attach_sup_walk_theory(r.curve, law);
            r.max_sample = LogReal::from_log(1, total.max_m);
            r.first_sample = LogReal::from_log(1, total.first_m);
            r.mean_terms =
                static_cast<double>(total.total_steps) / static_cast<double>(n);

            // Stopping-rule bias: a path abandoned once it falls guard_log
            // below its record can still beat the record later with
            // probability at most the sup-walk tail at record + guard. The
            // per-threshold estimate below is that tail at u + guard, the
            // mass the stopping rule leaves unobserved for records near u.
            r.record_bias.reserve(grid.size());
            json bias = json::array();
            for (double u : grid) {
                double est = std::numeric_limits<double>::quiet_NaN();
                try {
                    est = theory_sup_walk(law, u + scenario.guard_log);
                } catch (const Error&) {
                }
                r.record_bias.push_back(est);
                bias.push_back(json{{"estimate", est}, {"u", u}});
            }
            summary["law"] = law.name;
            summary["regime"] = r.curve.regime;
            summary["guard_log"] = scenario.guard_log;
            summary["mean_steps"] = r.mean_terms;
            summary["stopping_bias"] = bias;
            break;
        }
        case ScenarioMode::Example34: {
            LawConfig cfg_one = scenario.law;
            cfg_one.coupling = Coupling::BEqualsA;
            LawConfig cfg_two = scenario.law;
            cfg_two.coupling = Coupling::Independent;
            const InputLaw law_one = build_law(cfg_one);
            const InputLaw law_two = build_law(cfg_two);
            const LipschitzSystem sys_one = make_affine_system(law_one);
            const LipschitzSystem sys_two = make_affine_system(law_two);
            PerpetuityOptions popts;
            popts.rel_tol_log = stationary_depth(scenario.rel_tol_log, grid);
            popts.max_terms = scenario.max_terms;
            const StationaryAccum one =
                sample_stationary(sys_one, grid, n, r.seed, kStreamCouplingOne,
                                  r.workers, popts);
            const StationaryAccum two =
                sample_stationary(sys_two, grid, n, r.seed, kStreamCouplingTwo,
                                  r.workers, popts);
            r.curve = tail_curve_from_counts(grid, n, one.counts);
            attach_stationary_theory(r.curve, law_one, default_regime(law_one));
            r.curve_independent = tail_curve_from_counts(grid, n, two.counts);
            attach_stationary_theory(r.curve_independent, law_two,
                                     default_regime(law_two));
            r.max_sample = one.max_value;
            r.first_sample = one.first;
            r.mean_terms = static_cast<double>(one.total_terms + two.total_terms) /
                           static_cast<double>(2 * n);

            // Report the factor at the deepest threshold that still has
            // exceedances in the denominator.
            for (std::size_t g = grid.size(); g-- > 0;) {
                if (r.curve.counts[g] > 0) {
                    r.factor = tail_factor(r.curve_independent, r.curve, grid[g]);
                    summary["factor"] = json{{"estimate", r.factor->factor},
                                             {"hi", r.factor->hi},
                                             {"lo", r.factor->lo},
                                             {"u", grid[g]}};
                    break;
                }
            }
            summary["law"] = law_one.name;
            summary["law_independent"] = law_two.name;
            summary["regime"] = r.curve.regime;
            summary["resolution_log"] = popts.rel_tol_log;
            break;
        }
        case ScenarioMode::Diagnostics: {
            r.tables = run_class_diagnostics();
            json tables = json::array();
            for (const DiagTable& t : r.tables) {
                json entry;
                entry["name"] = t.name;
                entry["verdict"] = t.verdict;
                if (std::isfinite(t.terminal_value)) {
                    entry["terminal_value"] = t.terminal_value;
                }
                if (t.name.rfind("potter-", 0) == 0) {
                    entry["threshold_present"] = t.threshold_present;
                }
                tables.push_back(std::move(entry));
            }
            summary["tables"] = std::move(tables);
            break;
        }
    }

    if (scenario.mode != ScenarioMode::Diagnostics) {
        summary["n_samples"] = n;
        summary["grid"] = grid;
        if (!r.curve.theory.empty()) {
            try {
                summary["ratio_trend"] = ratio_trend(r.curve);
            } catch (const Error&) {
            }
        }
        summary["max_sample"] = log_real_json(r.max_sample);
        summary["mean_terms"] = r.mean_terms;
    }

    // Checks run against the fully assembled result.
    for (const CheckSpec& spec : scenario.checks) {
        r.checks.push_back(eval_check(spec, r));
    }
    json checks = json::array();
    for (const CheckResult& c : r.checks) {
        checks.push_back(json{{"detail", c.detail}, {"name", c.name}, {"pass", c.pass}});
    }
    summary["checks"] = std::move(checks);
    summary["all_passed"] = r.all_passed();

    // Artifacts. Everything except metadata.json is a deterministic function
    // of (scenario, seed): reruns must reproduce every byte.
    ArtifactWriter writer;
    writer.enabled = options.write_outputs;
    writer.paths = &r.artifacts;
    writer.dir = !options.out_dir.empty()
                     ? fs::path(options.out_dir)
                     : (!scenario.out_dir.empty() ? fs::path(scenario.out_dir)
                                                  : fs::path("out") / scenario.name);

    if (scenario.mode == ScenarioMode::Diagnostics) {
        for (const DiagTable& t : r.tables) {
            writer.emit(t.name + ".csv", diag_rows_csv(t.rows, scenario.name, r.seed));
        }
    } else if (scenario.mode == ScenarioMode::Example34) {
        writer.emit("tail_curve_b_equals_a.csv",
                    tail_curve_csv(r.curve, scenario.name, r.seed));
        writer.emit("tail_curve_independent.csv",
                    tail_curve_csv(r.curve_independent, scenario.name, r.seed));
        // factor curve across all thresholds with a nonzero denominator
        std::string factor_csv = "# scenario=" + scenario.name +
                                 " seed=" + std::to_string(r.seed) + "\n";
        factor_csv += "u,factor,lo,hi\n";
        std::vector<double> fx, fy, flo, fhi;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            if (r.curve.counts[g] == 0) continue;
            const FactorEstimate est =
                tail_factor(r.curve_independent, r.curve, grid[g]);
            factor_csv += format_double(grid[g]) + "," +
                          format_double(est.factor) + "," + format_double(est.lo) +
                          "," + format_double(est.hi) + "\n";
            fx.push_back(grid[g]);
            fy.push_back(est.factor);
            flo.push_back(est.lo);
            fhi.push_back(est.hi);
        }
        writer.emit("factor_curve.csv", factor_csv);
        if (options.svg && !fx.empty()) {
            PlotSeries est;
            est.label = "tail factor";
            est.xs = fx;
            est.ys = fy;
            est.y_lo = flo;
            est.y_hi = fhi;
            PlotSeries limit;
            limit.label = "limit 2";
            limit.color = "#d62728";
            limit.xs = fx;
            limit.ys.assign(fx.size(), 2.0);
            limit.draw_markers = false;
            PlotOptions popts2;
            popts2.title = scenario.name;
            popts2.x_label = "log threshold u";
            popts2.y_label = "coupling tail factor";
            popts2.log_y = false;
            writer.emit("factor_curve.svg", render_plot({est, limit}, {}, popts2));
        }
    } else {
        writer.emit("tail_curve.csv", tail_curve_csv(r.curve, scenario.name, r.seed));
        if (have_enumeration) {
            writer.emit("enumeration.csv",
                        enumeration_csv(enumeration.values, enumeration.probs,
                                        scenario.name));
        }
        if (options.svg) {
            try {
                writer.emit("tail_curve.svg",
                            tail_curve_svg(r.curve, scenario.name));
            } catch (const DomainError&) {
                // all-zero curves have no finite point on a log axis
            }
        }
    }

    if (scenario.trajectory_steps > 0 && scenario.mode != ScenarioMode::Diagnostics &&
        scenario.has_law) {
        const LipschitzSystem& traj_system = system;
        const double start = scenario.mode == ScenarioMode::FiniteHorizon
                                 ? scenario.horizon_r0
                                 : 0.0;
        std::vector<TrajectoryPoint> points;
        points.reserve(scenario.trajectory_steps + 1);
        const LogReal r0 = LogReal::from_double(start);
        points.push_back({0, r0.sign, r0.is_zero() ? 0.0 : r0.log_mag});
        RngStream rng(r.seed, component_stream(kStreamTrajectory, 0));
        forward_iterate(traj_system, rng, r0, scenario.trajectory_steps,
                        [&](std::size_t k, const LogReal& state) {
                            points.push_back({k, state.sign,
                                              state.is_zero() ? 0.0
                                                              : state.log_mag});
                        });
        writer.emit("trajectory.csv",
                    trajectory_csv(points, scenario.name, r.seed));
    }

    summary["artifacts"] = writer.names;
    r.summary_json = summary.dump(2) + "\n";
    if (options.write_outputs) {
        write_text_atomic(writer.dir / "summary.json", r.summary_json);
        r.artifacts.push_back((writer.dir / "summary.json").string());

        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        json meta;
        meta["elapsed_seconds"] = elapsed;
        meta["generated_at"] = iso_utc_now();
        meta["name"] = scenario.name;
        meta["schema_version"] = 1;
        meta["workers"] = r.workers;
        write_text_atomic(writer.dir / "metadata.json", meta.dump(2) + "\n");
        r.artifacts.push_back((writer.dir / "metadata.json").string());
    }

    return r;
}

TheoryCurve scenario_theory(const Scenario& scenario) {
    if (scenario.mode == ScenarioMode::Diagnostics ||
        scenario.mode == ScenarioMode::Example34) {
        throw ConfigError("mode " + mode_name(scenario.mode) +
                          " has no single prediction curve");
    }
    InputLaw law;
    if (scenario.system_kind == SystemKind::Arch1) {
        law = make_arch1(scenario.arch_a1, scenario.arch_a2, scenario.arch_d).law;
    } else {
        law = build_law(scenario.law);
    }
    TheoryCurve out;
    out.grid = scenario.grid;
    out.preds.reserve(scenario.grid.size());
    if (scenario.mode == ScenarioMode::SupWalk) {
        out.regime_label = "SupWalk";
        for (double u : scenario.grid) {
            TailPrediction p;
            const double v = theory_sup_walk(law, u);
            p.point = v;
            p.lower = v;
            p.upper = v;
            out.preds.push_back(p);
        }
        return out;
    }
    const Regime regime =
        scenario.regime_auto ? default_regime(law) : scenario.regime;
    out.regime_label = regime_name(regime.kind);
    if (scenario.mode == ScenarioMode::FiniteHorizon) {
        const std::vector<double> r_pos(
            static_cast<std::size_t>(std::max(scenario.horizon_n, 0)), 1.0);
        for (double u : scenario.grid) {
            out.preds.push_back(theory_tail_finite(law, scenario.horizon_n,
                                                   scenario.horizon_w, regime, u,
                                                   r_pos));
        }
        return out;
    }
    for (double u : scenario.grid) {
        out.preds.push_back(theory_tail_stationary(law, regime, u));
    }
    return out;
}

Enumeration scenario_enumerate(const Scenario& scenario) {
    if (scenario.mode != ScenarioMode::FiniteHorizon) {
        throw ConfigError("enumeration needs a finite-horizon scenario");
    }
    InputLaw law = build_law(scenario.law);
    if (law.atoms.empty()) {
        throw ConfigError("enumeration needs a finite-support law");
    }
    const LipschitzSystem system = make_affine_system(std::move(law));
    return enumerate_finite(system, scenario.horizon_r0,
                            static_cast<std::size_t>(scenario.horizon_n));
}

}  // namespace tailsim
