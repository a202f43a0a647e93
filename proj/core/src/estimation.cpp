#include "tailsim/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailsim/errors.hpp"
#include "tailsim/stats.hpp"

namespace tailsim {

namespace {

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) {
        throw DomainError("tail grid must be non-empty");
    }
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(grid[i] < grid[i + 1])) {
            throw DomainError("tail grid must be strictly increasing");
        }
    }
}

void clear_theory(TailCurve& curve) {
    curve.theory.clear();
    curve.theory_lo.clear();
    curve.theory_hi.clear();
    curve.regime.clear();
}

void push_prediction(TailCurve& curve, const TailPrediction& pred) {
    curve.theory.push_back(
        pred.point ? *pred.point : std::numeric_limits<double>::quiet_NaN());
    curve.theory_lo.push_back(pred.lower);
    curve.theory_hi.push_back(pred.upper);
}

}  // namespace

std::vector<double> default_tail_grid() { return {25.0, 50.0, 100.0, 150.0, 200.0}; }

TailCurve tail_curve_from_counts(std::vector<double> grid,
                                 std::size_t n_samples,
                                 std::vector<std::size_t> counts) {
    check_grid(grid);
    if (n_samples == 0) {
        throw DomainError("tail curve needs at least one sample");
    }
    if (counts.size() != grid.size()) {
        throw DomainError("tail curve: counts and grid sizes differ");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > n_samples) {
            throw DomainError("tail curve: count exceeds sample size");
        }
        if (i > 0 && counts[i] > counts[i - 1]) {
            throw DomainError(
                "tail curve: counts must be nonincreasing across thresholds");
        }
    }
    TailCurve curve;
    curve.grid = std::move(grid);
    curve.n_samples = n_samples;
    curve.counts = std::move(counts);
    curve.p_hat.reserve(curve.counts.size());
    curve.ci_lo.reserve(curve.counts.size());
    curve.ci_hi.reserve(curve.counts.size());
    for (const std::size_t c : curve.counts) {
        curve.p_hat.push_back(static_cast<double>(c) /
                              static_cast<double>(n_samples));
        const Interval ci = wilson_interval(c, n_samples);
        curve.ci_lo.push_back(ci.lo);
        curve.ci_hi.push_back(ci.hi);
    }
    return curve;
}

TailCurve empirical_tail(const std::vector<LogReal>& samples,
                         std::vector<double> grid) {
    check_grid(grid);
    if (samples.empty()) {
        throw DomainError("empirical_tail: sample set is empty");
    }
    std::vector<std::size_t> counts(grid.size(), 0);
    for (const LogReal& s : samples) {
        if (s.sign <= 0) continue;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (s.log_mag > grid[i]) {
                ++counts[i];
            } else {
                break;  // grid is increasing, no deeper threshold matches
            }
        }
    }
    return tail_curve_from_counts(std::move(grid), samples.size(),
                                  std::move(counts));
}

TailCurve empirical_log_tail(const std::vector<double>& log_values,
                             std::vector<double> grid) {
    check_grid(grid);
    if (log_values.empty()) {
        throw DomainError("empirical_log_tail: sample set is empty");
    }
    std::vector<std::size_t> counts(grid.size(), 0);
    for (const double v : log_values) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (v > grid[i]) {
                ++counts[i];
            } else {
                break;
            }
        }
    }
    return tail_curve_from_counts(std::move(grid), log_values.size(),
                                  std::move(counts));
}

Regime default_regime(const InputLaw& law) {
    Regime regime;
    if (law.flags.b_minus_d_positive_as && law.flags.tail_condition_35_holds) {
        regime.kind = RegimeKind::PositiveBD;
    } else {
        regime.kind = RegimeKind::GeneralBounds;
    }
    return regime;
}

void attach_stationary_theory(TailCurve& curve, const InputLaw& law,
                              const Regime& regime) {
    clear_theory(curve);
    for (const double u : curve.grid) {
        push_prediction(curve, theory_tail_stationary(law, regime, u));
    }
    curve.regime = regime_name(regime.kind);
}

void attach_finite_horizon_theory(TailCurve& curve, const InputLaw& law,
                                  int n, double w, const Regime& regime,
                                  const std::vector<double>& r_pos) {
    clear_theory(curve);
    for (const double u : curve.grid) {
        push_prediction(curve, theory_tail_finite(law, n, w, regime, u, r_pos));
    }
    curve.regime = regime_name(regime.kind);
}

void attach_sup_walk_theory(TailCurve& curve, const InputLaw& law) {
    clear_theory(curve);
    for (const double u : curve.grid) {
        const double p = theory_sup_walk(law, u);
        curve.theory.push_back(p);
        curve.theory_lo.push_back(p);
        curve.theory_hi.push_back(p);
    }
    curve.regime = "SupWalk";
}

std::string ratio_trend(const TailCurve& curve) {
    if (curve.theory_hi.size() != curve.grid.size()) {
        throw DomainError("ratio_trend: attach theory columns first");
    }
    struct Ratio {
        double value;
        double lo;
        double hi;
    };
    std::vector<Ratio> ratios;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        double norm = curve.theory[i];
        if (!std::isfinite(norm)) {
            norm = 0.5 * (curve.theory_lo[i] + curve.theory_hi[i]);
        }
        // Thresholds where the prediction vanishes (beyond a bounded
        // support) or nothing was observed carry no ratio information.
        if (!(norm > 0.0) || curve.counts[i] == 0) continue;
        ratios.push_back(Ratio{curve.p_hat[i] / norm, curve.ci_lo[i] / norm,
                               curve.ci_hi[i] / norm});
    }
    if (ratios.size() < 3) return "inconclusive";

    const Ratio& a = ratios[ratios.size() - 3];
    const Ratio& b = ratios[ratios.size() - 2];
    const Ratio& c = ratios[ratios.size() - 1];
    const auto overlap = [](const Ratio& x, const Ratio& y) {
        return x.lo <= y.hi && y.lo <= x.hi;
    };
    if (overlap(a, b) && overlap(b, c) && overlap(a, c)) {
        return "stable";
    }

    bool monotone = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        if (ratios[i].value < ratios[i - 1].value * (1.0 - 1e-12)) {
            monotone = false;
            break;
        }
    }
    if (monotone && ratios.back().value >= 2.0 * ratios.front().value) {
        return "diverging";
    }
    return "inconclusive";
}

FactorEstimate tail_factor(const TailCurve& numerator,
                           const TailCurve& denominator, double u) {
    const auto locate = [u](const TailCurve& c, const char* which) {
        const auto it = std::find(c.grid.begin(), c.grid.end(), u);
        if (it == c.grid.end()) {
            throw DomainError(std::string("tail_factor: threshold missing from ") +
                              which + " grid");
        }
        return static_cast<std::size_t>(it - c.grid.begin());
    };
    const std::size_t i = locate(numerator, "numerator");
    const std::size_t j = locate(denominator, "denominator");
    if (denominator.counts[j] == 0) {
        throw DomainError(
            "tail_factor: denominator has no exceedances at the threshold");
    }
    FactorEstimate est;
    est.factor = numerator.p_hat[i] / denominator.p_hat[j];
    est.lo = numerator.ci_lo[i] / denominator.ci_hi[j];
    est.hi = denominator.ci_lo[j] > 0.0
                 ? numerator.ci_hi[i] / denominator.ci_lo[j]
                 : std::numeric_limits<double>::infinity();
    return est;
}

}  // namespace tailsim
