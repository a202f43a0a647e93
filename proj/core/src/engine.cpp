#include "tailsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailsim/errors.hpp"

namespace tailsim {
namespace {

void check_state_magnitude(const LogReal& v) {
    if (v.log_mag > kMaxLogMag) {
        throw OverflowError("state magnitude exceeded the overflow guard "
                            "during composition");
    }
}

LogReal positive_part(const LogReal& x) {
    return x.sign > 0 ? x : LogReal::zero();
}

}  // namespace

LogReal backward_compose(const LipschitzSystem& system,
                         const std::vector<InputDraw>& draws,
                         const LogReal& r0) {
    if (!system.apply) throw ConfigError("system has no map evaluator");
    LogReal v = r0;
    for (std::size_t i = draws.size(); i-- > 0;) {
        v = system.apply(draws[i], v);
        check_state_magnitude(v);
    }
    return v;
}

LogReal forward_iterate(
    const LipschitzSystem& system, RngStream& rng, const LogReal& r0,
    std::size_t steps,
    const std::function<void(std::size_t, const LogReal&)>& visit) {
    if (!system.apply) throw ConfigError("system has no map evaluator");
    LogReal v = r0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const InputDraw draw = sample_input(system.law, rng);
        v = system.apply(draw, v);
        check_state_magnitude(v);
        if (visit) visit(k, v);
    }
    return v;
}

PerpetuitySampler::PerpetuitySampler(const LipschitzSystem& system,
                                     PerpetuityOptions opts)
    : system_(&system), opts_(opts) {
    if (!(opts_.rel_tol_log > 0.0)) {
        throw ConfigError("perpetuity rel_tol_log must be positive");
    }
    if (opts_.max_terms == 0) {
        throw ConfigError("perpetuity max_terms must be positive");
    }
}

StationarySample PerpetuitySampler::sample(RngStream& rng) {
    draws_.clear();

    StationarySample out;
    double prefix_log = 0.0;       // log of A_1 ... A_k after k terms
    double env_max_log = 0.0;      // log of max envelope term size (>= 1)
    LogReal lower = LogReal::zero();
    LogReal upper = LogReal::zero();

    for (std::size_t k = 1; k <= opts_.max_terms; ++k) {
        const InputDraw draw = sample_input(system_->law, rng);
        draws_.push_back(draw);

        const LogReal prefix = LogReal::from_log(+1, prefix_log);
        const LogReal lo_term = sub(draw.b, draw.d);
        const LogReal hi_term = add(positive_part(draw.b), draw.d);
        lower = add(lower, mul(prefix, lo_term));
        upper = add(upper, mul(prefix, hi_term));

        prefix_log += draw.a.log_mag;
        if (std::abs(prefix_log) > kMaxLogMag) {
            throw OverflowError("prefix product exceeded the overflow guard "
                                "in the backward series");
        }

        double env_log = 0.0;
        if (!lo_term.is_zero()) env_log = std::max(env_log, lo_term.log_mag);
        if (!hi_term.is_zero()) env_log = std::max(env_log, hi_term.log_mag);
        env_max_log = std::max(env_max_log, env_log);

        // Residual bound: every future term is at most prefix * env_max
        // shrunk geometrically at the running contraction estimate.
        const double rho =
            std::min(prefix_log / static_cast<double>(k), -1e-3);
        const double geo_log = -std::log1p(-std::exp(rho));
        const double residual_log = prefix_log + env_max_log + geo_log;

        double scale_log = 0.0;
        if (!lower.is_zero()) scale_log = std::max(scale_log, lower.log_mag);
        if (!upper.is_zero()) scale_log = std::max(scale_log, upper.log_mag);

        if (residual_log <= scale_log - opts_.rel_tol_log) {
            out.converged = true;
            out.terms_used = k;
            out.residual_log_bound = residual_log;
            break;
        }
    }
    if (!out.converged) {
        throw ConvergenceError(
            "backward series did not reach the requested resolution within "
            "the term budget");
    }

    out.lower = lower;
    out.upper = upper;
    out.value = backward_compose(*system_, draws_, LogReal::zero());
    return out;
}

StationarySample sample_perpetuity(const LipschitzSystem& system,
                                   RngStream& rng,
                                   const PerpetuityOptions& opts) {
    PerpetuitySampler sampler(system, opts);
    return sampler.sample(rng);
}

SupWalkSample sample_sup_walk(const InputLaw& law, RngStream& rng,
                              const SupWalkOptions& opts) {
    if (!(opts.guard_log > 0.0)) {
        throw ConfigError("sup-walk guard_log must be positive");
    }
    SupWalkSample out;
    out.m = -std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (std::size_t n = 0; n < opts.max_steps; ++n) {
        const InputDraw draw = sample_input(law, rng);
        const LogReal bbar =
            max(add(positive_part(draw.b), draw.d), LogReal::one());
        const double cand = s + bbar.log_mag;
        if (cand > out.m) {
            out.m = cand;
            out.record_index = n;
        }
        s += draw.a.log_mag;
        out.steps = n + 1;
        if (s <= out.m - opts.guard_log) return out;
    }
    throw ConvergenceError(
        "perturbed walk did not fall below its record within the step "
        "budget");
}

Enumeration enumerate_finite(const LipschitzSystem& system, double r0,
                             std::size_t steps, std::size_t max_states) {
    if (system.law.atoms.empty()) {
        throw ConfigError("enumeration requires a finite-support law");
    }
    if (!system.apply) throw ConfigError("system has no map evaluator");

    struct State {
        double value;
        double prob;
    };
    std::vector<State> states{{r0, 1.0}};
    std::vector<State> next;

    for (std::size_t step = 0; step < steps; ++step) {
        next.clear();
        next.reserve(states.size() * system.law.atoms.size());
        for (const State& s : states) {
            const LogReal v = LogReal::from_double(s.value);
            for (const Atom& atom : system.law.atoms) {
                InputDraw draw{LogReal::from_double(atom.a),
                               LogReal::from_double(atom.b),
                               LogReal::from_double(atom.d)};
                const LogReal mapped = system.apply(draw, v);
                check_state_magnitude(mapped);
                next.push_back({mapped.to_double(), s.prob * atom.prob});
            }
        }
        std::sort(next.begin(), next.end(),
                  [](const State& a, const State& b) {
                      return a.value < b.value;
                  });
        // Merge states that are equal up to roundoff.
        states.clear();
        for (const State& s : next) {
            if (!states.empty()) {
                State& last = states.back();
                const double tol =
                    1e-12 * std::max({1.0, std::abs(last.value),
                                      std::abs(s.value)});
                if (s.value - last.value <= tol) {
                    // Probability-weighted position keeps the merge
                    // symmetric in its inputs.
                    const double p = last.prob + s.prob;
                    last.value =
                        (last.value * last.prob + s.value * s.prob) / p;
                    last.prob = p;
                    continue;
                }
            }
            states.push_back(s);
        }
        if (states.size() > max_states) {
            throw OverflowError("enumeration state count exceeded the "
                                "budget");
        }
    }

    Enumeration out;
    out.steps = steps;
    out.values.reserve(states.size());
    out.probs.reserve(states.size());
    for (const State& s : states) {
        out.values.push_back(s.value);
        out.probs.push_back(s.prob);
    }
    return out;
}

}  // namespace tailsim
