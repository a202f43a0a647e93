#include "tailsim/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailsim/errors.hpp"

namespace tailsim {
namespace {

// Relative slack tolerated before an envelope breach counts as a violation
// (covers rounding in the log-scale arithmetic).
constexpr double kEnvelopeSlack = 1e-9;

LogReal positive_part(const LogReal& x) {
    return x.sign > 0 ? x : LogReal::zero();
}

// Signed relative margin of `diff` against a reference magnitude:
// >= 0 when the bound holds, negative (relative breach size) otherwise.
double relative_margin(const LogReal& diff, double ref_log) {
    if (diff.sign >= 0) return 0.0;
    const double scale = std::max(ref_log, 0.0);
    return -std::exp(diff.log_mag - scale);
}

}  // namespace

std::string system_kind_name(SystemKind kind) {
    switch (kind) {
        case SystemKind::Affine: return "affine";
        case SystemKind::Arch1: return "arch1";
        case SystemKind::Custom: return "custom";
    }
    return "unknown";
}

LipschitzSystem make_affine_system(InputLaw law) {
    LipschitzSystem sys;
    sys.kind = SystemKind::Affine;
    sys.name = "affine[" + law.name + "]";
    sys.mean_log_lip = -law.mu;
    sys.law = std::move(law);
    sys.apply = [](const InputDraw& draw, const LogReal& t) {
        return add(mul(draw.a, t), draw.b);
    };
    return sys;
}

LipschitzSystem make_arch1(double a1, double a2, double d) {
    if (!(a1 >= 0.0) || !(a2 >= 0.0) || !(d > 0.0)) {
        throw ConfigError("arch1 requires a1 >= 0, a2 >= 0, d > 0");
    }
    const double slope = a1 + std::sqrt(a2);
    if (!(slope > 0.0) || !(slope < 1.0)) {
        std::ostringstream msg;
        msg << "arch1 requires 0 < a1 + sqrt(a2) < 1 for a contracting "
               "envelope; got " << slope;
        throw ConfigError(msg.str());
    }

    LipschitzSystem sys;
    sys.kind = SystemKind::Arch1;
    {
        std::ostringstream name;
        name << "arch1(" << a1 << "," << a2 << "," << d << ")";
        sys.name = name.str();
    }
    sys.law = make_deterministic(slope, 0.0, std::sqrt(d));
    sys.mean_log_lip = std::log(slope);

    const double sa2 = std::sqrt(a2);
    const double sd = std::sqrt(d);
    sys.apply = [a1, a2, d, sa2, sd](const InputDraw&, const LogReal& t) {
        if (t.is_zero()) return LogReal::from_double(sd);
        // Beyond |t| ~ 1e150 the d term is below resolution and direct
        // double evaluation would overflow; use the exact limits
        // (a1 + sqrt(a2)) t for t > 0 and |a1 |t| - sqrt(d)| for t < 0.
        if (t.log_mag > 345.0) {
            if (t.sign > 0) {
                return mul(LogReal::from_double(a1 + sa2), t);
            }
            const LogReal lin = mul(LogReal::from_double(a1), t.abs());
            return sub(lin, LogReal::from_double(sd)).abs();
        }
        const double td = t.to_double();
        const double tp = std::max(td, 0.0);
        return LogReal::from_double(
            std::abs(a1 * td + std::sqrt(d + a2 * tp * tp)));
    };
    return sys;
}

EnvelopeReport envelope_check(const LipschitzSystem& system, RngStream& rng,
                              std::size_t n_draws,
                              const std::vector<double>& grid) {
    if (n_draws == 0 || grid.empty()) {
        throw DomainError("envelope_check needs at least one draw and one "
                          "grid state");
    }
    if (!system.apply) {
        throw ConfigError("system has no map evaluator");
    }

    EnvelopeReport report;
    report.draws = n_draws;
    report.points = grid.size();
    std::vector<double> worst_lower(grid.size(), 0.0);
    std::vector<double> worst_upper(grid.size(), 0.0);

    std::vector<LogReal> states;
    states.reserve(grid.size());
    for (double t : grid) states.push_back(LogReal::from_double(t));

    for (std::size_t k = 0; k < n_draws; ++k) {
        const InputDraw draw = sample_input(system.law, rng);
        const LogReal b_plus = positive_part(draw.b);
        for (std::size_t i = 0; i < states.size(); ++i) {
            const LogReal& t = states[i];
            const LogReal psi = system.apply(draw, t);
            const LogReal lower = sub(add(mul(draw.a, t), draw.b), draw.d);
            const LogReal upper =
                add(add(mul(draw.a, positive_part(t)), b_plus), draw.d);

            const double ref = std::max(psi.log_mag,
                                        std::max(lower.log_mag,
                                                 upper.log_mag));
            const double m_lo = relative_margin(sub(psi, lower), ref);
            const double m_hi = relative_margin(sub(upper, psi), ref);
            worst_lower[i] = std::min(worst_lower[i], m_lo);
            worst_upper[i] = std::min(worst_upper[i], m_hi);
            if (m_lo < -kEnvelopeSlack || m_hi < -kEnvelopeSlack) {
                ++report.violations;
            }
        }
    }

    report.rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool ok = worst_lower[i] >= -kEnvelopeSlack &&
                        worst_upper[i] >= -kEnvelopeSlack;
        report.rows.push_back({grid[i], 0.0, worst_lower[i], worst_upper[i],
                               ok ? "ok" : "violation"});
        report.worst_lower_margin =
            std::min(report.worst_lower_margin, worst_lower[i]);
        report.worst_upper_margin =
            std::min(report.worst_upper_margin, worst_upper[i]);
    }
    return report;
}

}  // namespace tailsim
