#include "tailsim/theory.hpp"

#include <cmath>

#include "tailsim/errors.hpp"
#include "tailsim/quadrature.hpp"

namespace tailsim {

namespace {

void require_exact_regime_flags(const InputLaw& law, RegimeKind kind) {
    if (kind == RegimeKind::PositiveBD && !law.flags.b_minus_d_positive_as) {
        throw DomainError(law.name +
                          ": PositiveBD regime requires B - D > 0 a.s. "
                          "(flag b_minus_d_positive_as)");
    }
    if (kind != RegimeKind::GeneralBounds &&
        !law.flags.tail_condition_35_holds) {
        throw DomainError(law.name +
                          ": exact-constant regimes require the "
                          "tail-equivalence flag; only GeneralBounds is "
                          "available for this law");
    }
}

double checked_aux(const Regime& regime, const char* who) {
    if (!regime.aux.has_value()) {
        throw DomainError(std::string(who) +
                          ": regime requires an aux P[R > 0] estimate");
    }
    const double aux = *regime.aux;
    if (!(aux >= 0.0 && aux <= 1.0)) {
        throw DomainError(std::string(who) + ": aux must lie in [0, 1]");
    }
    return aux;
}

std::pair<double, double> aux_band(const Regime& regime, double aux) {
    if (regime.aux_interval.has_value()) {
        const auto [lo, hi] = *regime.aux_interval;
        if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) {
            throw DomainError("aux interval must satisfy 0 <= lo <= hi <= 1");
        }
        return {lo, hi};
    }
    return {aux, aux};
}

double sum_r_pos(const std::vector<double>& r_pos, int n, const char* who) {
    if (static_cast<int>(r_pos.size()) < n) {
        throw DomainError(std::string(who) +
                          ": needs P[R_k > 0] estimates for k < n");
    }
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        if (!(r_pos[k] >= 0.0 && r_pos[k] <= 1.0)) {
            throw DomainError(std::string(who) +
                              ": P[R_k > 0] estimates must lie in [0, 1]");
        }
        s += r_pos[k];
    }
    return s;
}

}  // namespace

std::string regime_name(RegimeKind kind) {
    switch (kind) {
        case RegimeKind::GeneralBounds: return "GeneralBounds";
        case RegimeKind::PositiveBD: return "PositiveBD";
        case RegimeKind::BDominates: return "BDominates";
        case RegimeKind::ADominates: return "ADominates";
    }
    return "Unknown";
}

TailPrediction theory_tail_stationary(const InputLaw& law,
                                      const Regime& regime, double u) {
    require_exact_regime_flags(law, regime.kind);
    TailPrediction pred;
    pred.regime = regime.kind;
    const double inv_mu = 1.0 / law.mu;

    switch (regime.kind) {
        case RegimeKind::GeneralBounds:
        case RegimeKind::PositiveBD: {
            const IntegratedTail fi = integrated_tail(law);
            const double v = fi.eval(u);
            if (v >= 1.0) {
                throw DomainError(
                    law.name +
                    ": u is at or below the integrated-tail saturation "
                    "point; the asymptotic prediction is undefined there");
            }
            if (regime.kind == RegimeKind::PositiveBD) {
                pred.point = inv_mu * v;
                pred.lower = pred.upper = *pred.point;
            } else {
                const double aux = regime.aux.value_or(0.0);
                if (!(aux >= 0.0 && aux <= 1.0)) {
                    throw DomainError(law.name + ": aux must lie in [0, 1]");
                }
                const auto [lo, hi] = aux_band(regime, aux);
                (void)hi;
                pred.lower = lo * inv_mu * v;
                pred.upper = inv_mu * v;
            }
            break;
        }
        case RegimeKind::BDominates: {
            const double integral =
                upper_tail_integral(law.log_b_plus_tail, std::max(u, 0.0));
            if (integral >= 1.0) {
                throw DomainError(law.name +
                                  ": u below saturation of the positive-part "
                                  "tail integral");
            }
            pred.point = inv_mu * integral;
            pred.lower = pred.upper = *pred.point;
            break;
        }
        case RegimeKind::ADominates: {
            const double aux = checked_aux(regime, "theory_tail_stationary");
            const double integral = upper_tail_integral(law.log_a_tail, u);
            if (integral >= 1.0) {
                throw DomainError(law.name +
                                  ": u below saturation of the contraction "
                                  "tail integral");
            }
            const auto [lo, hi] = aux_band(regime, aux);
            pred.point = aux * inv_mu * integral;
            pred.lower = lo * inv_mu * integral;
            pred.upper = hi * inv_mu * integral;
            break;
        }
    }
    return pred;
}

TailPrediction theory_tail_finite(const InputLaw& law, int n, double w,
                                  const Regime& regime, double u,
                                  const std::vector<double>& r_pos) {
    if (n < 0) throw DomainError("theory_tail_finite: n must be >= 0");
    if (w < 0.0) throw DomainError("theory_tail_finite: w must be >= 0");
    require_exact_regime_flags(law, regime.kind);

    TailPrediction pred;
    pred.regime = regime.kind;
    switch (regime.kind) {
        case RegimeKind::PositiveBD: {
            const double tail = law.log_ab_tail(u);
            pred.point = (w + n) * tail;
            pred.lower = pred.upper = *pred.point;
            break;
        }
        case RegimeKind::GeneralBounds: {
            const double tail = law.log_ab_tail(u);
            const double s = sum_r_pos(r_pos, n, "theory_tail_finite");
            pred.lower = (w + s) * tail;
            pred.upper = (w + n) * tail;
            if (pred.lower == pred.upper) pred.point = pred.lower;
            break;
        }
        case RegimeKind::BDominates: {
            const double tail = law.log_b_plus_tail(std::max(u, 0.0));
            pred.point = (w + n) * tail;
            pred.lower = pred.upper = *pred.point;
            break;
        }
        case RegimeKind::ADominates: {
            const double s = sum_r_pos(r_pos, n, "theory_tail_finite");
            const double tail = law.log_a_tail(u);
            pred.point = (w + s) * tail;
            pred.lower = pred.upper = *pred.point;
            break;
        }
    }
    return pred;
}

double theory_sup_walk(const InputLaw& law, double u) {
    const double integral = upper_tail_integral(law.log_ab_bar_tail, u);
    if (integral >= 1.0) {
        throw DomainError(law.name +
                          ": u below saturation of the walk-increment tail "
                          "integral; prediction undefined");
    }
    return integral / law.mu;
}

}  // namespace tailsim
