#include "tailsim/input_law.hpp"

#include <algorithm>
#include <cmath>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

}  // namespace

std::string family_name(Family family) {
    switch (family) {
        case Family::ParetoLog: return "ParetoLog";
        case Family::WeibullLog: return "WeibullLog";
        case Family::DiscreteFinite: return "DiscreteFinite";
        case Family::Deterministic: return "Deterministic";
        case Family::IndicatorCounter: return "IndicatorCounter";
        case Family::Custom: return "Custom";
    }
    return "Unknown";
}

std::string coupling_name(Coupling coupling) {
    switch (coupling) {
        case Coupling::BEqualsA: return "BEqualsA";
        case Coupling::Independent: return "Independent";
        case Coupling::Joint: return "Joint";
    }
    return "Unknown";
}

InputDraw sample_input(const InputLaw& law, RngStream& rng) {
    const InputDraw draw = law.sample(rng);
    if (draw.a.sign <= 0) {
        throw ConfigError(law.name + ": sampler produced non-positive A");
    }
    if (draw.d.sign < 0) {
        throw ConfigError(law.name + ": sampler produced negative D");
    }
    return draw;
}

InputLaw make_pareto_log(double alpha, double shift, Coupling coupling) {
    require(alpha > 1.0, "ParetoLog: alpha must exceed 1");
    const double mean_z = alpha / (alpha - 1.0);
    require(shift > mean_z,
            "ParetoLog: shift must exceed alpha/(alpha-1) so that the mean "
            "log contraction is negative");
    require(coupling != Coupling::Joint,
            "ParetoLog: coupling must be BEqualsA or Independent");

    InputLaw law;
    law.family = Family::ParetoLog;
    law.coupling = coupling;
    law.name = "ParetoLog(alpha=" + std::to_string(alpha) +
               ", shift=" + std::to_string(shift) + ", " +
               coupling_name(coupling) + ")";

    const double lo = 1.0 - shift;  // support edge of log A
    auto a_tail = [alpha, shift, lo](double x) {
        if (x < lo) return 1.0;
        return std::pow(x + shift, -alpha);
    };
    law.log_a_tail = a_tail;

    const bool independent = (coupling == Coupling::Independent);
    if (independent) {
        law.log_ab_tail = [a_tail](double x) {
            const double t = a_tail(x);
            return clamp01(t * (2.0 - t));  // 1 - (1-t)^2
        };
    } else {
        law.log_ab_tail = a_tail;
    }
    // B is distributed as A in both couplings and is > 0, so the positive
    // part only clips the tail at x = 0.
    law.log_b_plus_tail = [a_tail](double x) {
        return x < 0.0 ? 1.0 : a_tail(x);
    };
    // D = 0 and B > 0 imply Bbar = B v 1, so above 0 this is the plain
    // joint tail and below 0 it saturates.
    law.log_ab_bar_tail = [law_tail = law.log_ab_tail](double x) {
        return x < 0.0 ? 1.0 : law_tail(x);
    };

    law.mu = shift - mean_z;
    law.gamma = (alpha - 1.0) / 2.0;
    law.flags = LawFlags{true, true, true};

    if (independent) {
        law.closed_form_fi = [alpha, shift, lo](double x) {
            const double head =
                2.0 / (alpha - 1.0) - 1.0 / (2.0 * alpha - 1.0);
            if (x < lo) return clamp01((lo - x) + head);
            const double s = x + shift;
            return clamp01(2.0 * std::pow(s, 1.0 - alpha) / (alpha - 1.0) -
                           std::pow(s, 1.0 - 2.0 * alpha) /
                               (2.0 * alpha - 1.0));
        };
    } else {
        law.closed_form_fi = [alpha, shift, lo](double x) {
            if (x < lo) return clamp01((lo - x) + 1.0 / (alpha - 1.0));
            return clamp01(std::pow(x + shift, 1.0 - alpha) / (alpha - 1.0));
        };
    }

    auto draw_log_a = [alpha, shift](RngStream& rng) {
        // Inverse CDF of the unit Pareto: Z = u^(-1/alpha) >= 1.
        const double z = std::pow(rng.next_double(), -1.0 / alpha);
        return z - shift;
    };
    if (independent) {
        law.uniforms_per_draw = 2;
        law.sample = [draw_log_a](RngStream& rng) {
            const double la = draw_log_a(rng);
            const double lb = draw_log_a(rng);
            return InputDraw{LogReal::from_log(+1, la),
                             LogReal::from_log(+1, lb), LogReal::zero()};
        };
    } else {
        law.uniforms_per_draw = 1;
        law.sample = [draw_log_a](RngStream& rng) {
            const double la = draw_log_a(rng);
            const LogReal a = LogReal::from_log(+1, la);
            return InputDraw{a, a, LogReal::zero()};
        };
    }
    return law;
}

InputLaw make_weibull_log(double beta, double scale, double shift,
                          Coupling coupling) {
    require(beta > 0.0 && beta < 1.0,
            "WeibullLog: beta must lie in (0, 1) for a subexponential "
            "integrated tail");
    require(scale > 0.0, "WeibullLog: scale must be positive");
    const double mean_w = scale * std::tgamma(1.0 + 1.0 / beta);
    require(shift > mean_w,
            "WeibullLog: shift must exceed scale*Gamma(1+1/beta) so that "
            "the mean log contraction is negative");
    require(coupling != Coupling::Joint,
            "WeibullLog: coupling must be BEqualsA or Independent");

    InputLaw law;
    law.family = Family::WeibullLog;
    law.coupling = coupling;
    law.name = "WeibullLog(beta=" + std::to_string(beta) +
               ", scale=" + std::to_string(scale) +
               ", shift=" + std::to_string(shift) + ", " +
               coupling_name(coupling) + ")";

    auto a_tail = [beta, scale, shift](double x) {
        if (x < -shift) return 1.0;
        return std::exp(-std::pow((x + shift) / scale, beta));
    };
    law.log_a_tail = a_tail;
    const bool independent = (coupling == Coupling::Independent);
    if (independent) {
        law.log_ab_tail = [a_tail](double x) {
            const double t = a_tail(x);
            return clamp01(t * (2.0 - t));
        };
    } else {
        law.log_ab_tail = a_tail;
    }
    law.log_b_plus_tail = [a_tail](double x) {
        return x < 0.0 ? 1.0 : a_tail(x);
    };
    law.log_ab_bar_tail = [law_tail = law.log_ab_tail](double x) {
        return x < 0.0 ? 1.0 : law_tail(x);
    };

    law.mu = shift - mean_w;
    law.gamma = 1.0;  // all polynomial moments of log^+(A v B) are finite
    law.flags = LawFlags{true, true, true};
    // closed_form_fi intentionally absent: this family exercises the
    // numerical integrated-tail path.

    auto draw_log_a = [beta, scale, shift](RngStream& rng) {
        const double e = -std::log(rng.next_double());
        return scale * std::pow(e, 1.0 / beta) - shift;
    };
    if (independent) {
        law.uniforms_per_draw = 2;
        law.sample = [draw_log_a](RngStream& rng) {
            const double la = draw_log_a(rng);
            const double lb = draw_log_a(rng);
            return InputDraw{LogReal::from_log(+1, la),
                             LogReal::from_log(+1, lb), LogReal::zero()};
        };
    } else {
        law.uniforms_per_draw = 1;
        law.sample = [draw_log_a](RngStream& rng) {
            const double la = draw_log_a(rng);
            const LogReal a = LogReal::from_log(+1, la);
            return InputDraw{a, a, LogReal::zero()};
        };
    }
    return law;
}

namespace {

// Shared tail machinery for finite-support laws. Exact step functions and
// an exact piecewise-linear integrated tail; quadrature never touches
// these discontinuous integrands.
struct FiniteTails {
    TailFn log_a_tail;
    TailFn log_ab_tail;
    TailFn log_b_plus_tail;
    TailFn log_ab_bar_tail;
    TailFn fi;
    double mu = 0.0;
    bool d_all_zero = true;
    bool b_minus_d_positive = true;
};

FiniteTails build_finite_tails(const std::vector<Atom>& atoms) {
    FiniteTails t;
    std::vector<std::pair<double, double>> la, lab, lbp, labbar;
    la.reserve(atoms.size());
    double mu = 0.0;
    for (const Atom& atom : atoms) {
        const double log_a = std::log(atom.a);
        const double ab = std::max(atom.a, atom.b);
        const double b_plus = std::max(atom.b, 0.0);
        const double b_bar = std::max(b_plus + atom.d, 1.0);
        la.emplace_back(log_a, atom.prob);
        lab.emplace_back(std::log(ab), atom.prob);
        lbp.emplace_back(std::log(std::max(b_plus, 1.0)), atom.prob);
        labbar.emplace_back(std::log(std::max(atom.a, b_bar)), atom.prob);
        mu -= atom.prob * log_a;
        t.d_all_zero = t.d_all_zero && atom.d == 0.0;
        t.b_minus_d_positive = t.b_minus_d_positive && atom.b - atom.d > 0.0;
    }
    t.mu = mu;

    auto step_tail = [](std::vector<std::pair<double, double>> pts) {
        return TailFn([pts = std::move(pts)](double x) {
            double p = 0.0;
            for (const auto& [v, w] : pts) {
                if (v > x) p += w;
            }
            return clamp01(p);
        });
    };
    t.log_a_tail = step_tail(la);
    t.log_ab_tail = step_tail(lab);
    t.log_b_plus_tail = step_tail(lbp);
    t.log_ab_bar_tail = step_tail(labbar);
    // int_x^inf of a step tail: sum of p_i * (v_i - x)^+.
    t.fi = TailFn([lab](double x) {
        double s = 0.0;
        for (const auto& [v, w] : lab) s += w * std::max(0.0, v - x);
        return clamp01(s);
    });
    return t;
}

}  // namespace

InputLaw make_discrete_finite(std::vector<Atom> atoms) {
    require(!atoms.empty(), "DiscreteFinite: atom list is empty");
    double total = 0.0;
    for (const Atom& atom : atoms) {
        require(atom.prob >= 0.0, "DiscreteFinite: negative probability");
        require(atom.a > 0.0, "DiscreteFinite: atom with A <= 0");
        require(atom.d >= 0.0, "DiscreteFinite: atom with D < 0");
        total += atom.prob;
    }
    require(std::fabs(total - 1.0) <= 1e-12,
            "DiscreteFinite: probabilities must sum to 1");

    FiniteTails tails = build_finite_tails(atoms);
    require(tails.mu > 0.0,
            "DiscreteFinite: -sum p_i log a_i must be positive (mean "
            "contraction)");

    InputLaw law;
    law.family = Family::DiscreteFinite;
    law.coupling = Coupling::Joint;
    law.name = "DiscreteFinite(" + std::to_string(atoms.size()) + " atoms)";
    law.log_a_tail = tails.log_a_tail;
    law.log_ab_tail = tails.log_ab_tail;
    law.log_b_plus_tail = tails.log_b_plus_tail;
    law.log_ab_bar_tail = tails.log_ab_bar_tail;
    law.closed_form_fi = tails.fi;
    law.mu = tails.mu;
    law.gamma = 1.0;
    law.flags =
        LawFlags{tails.d_all_zero, tails.b_minus_d_positive, false};
    law.atoms = atoms;
    law.uniforms_per_draw = 1;
    law.sample = [atoms](RngStream& rng) {
        double u = rng.next_double();
        std::size_t idx = atoms.size() - 1;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (u < atoms[i].prob) {
                idx = i;
                break;
            }
            u -= atoms[i].prob;
        }
        const Atom& atom = atoms[idx];
        return InputDraw{LogReal::from_double(atom.a),
                         LogReal::from_double(atom.b),
                         LogReal::from_double(atom.d)};
    };
    return law;
}

InputLaw make_deterministic(double a, double b, double d) {
    require(a > 0.0 && a < 1.0,
            "Deterministic: a must lie in (0, 1) for mean contraction");
    require(d >= 0.0, "Deterministic: d must be nonnegative");
    InputLaw law = make_discrete_finite({Atom{a, b, d, 1.0}});
    law.family = Family::Deterministic;
    law.name = "Deterministic(a=" + std::to_string(a) +
               ", b=" + std::to_string(b) + ", d=" + std::to_string(d) + ")";
    law.uniforms_per_draw = 0;
    const InputDraw fixed{LogReal::from_double(a), LogReal::from_double(b),
                          LogReal::from_double(d)};
    law.sample = [fixed](RngStream&) { return fixed; };
    return law;
}

InputLaw make_indicator_counter(const InputLaw& base) {
    require(base.family == Family::ParetoLog ||
                base.family == Family::WeibullLog,
            "IndicatorCounter: base must be a continuous family (ParetoLog "
            "or WeibullLog)");
    require(base.coupling == Coupling::BEqualsA,
            "IndicatorCounter: pass the base with coupling BEqualsA; only "
            "its A-marginal is used");

    InputLaw law;
    law.family = Family::IndicatorCounter;
    law.coupling = Coupling::Joint;  // B is a function of A
    law.name = "IndicatorCounter(base=" + base.name + ")";

    const TailFn a_tail = base.log_a_tail;
    law.log_a_tail = a_tail;
    // A v B equals A when A > 1 and max(A, 1-A) when A <= 1, so the joint
    // tail needs the CDF of A at 1-t as well:
    //   P[A v B > e^x] = P[A > e^x] + P[A < 1 - e^x]   for e^x in [1/2, 1)
    // and is 1 below e^x = 1/2 (max(A, 1-A) >= 1/2 on {A <= 1}),
    // P[A > e^x] at and above e^x = 1.
    law.log_ab_tail = [a_tail](double x) {
        if (x >= 0.0) return a_tail(x);
        const double t = std::exp(x);
        if (t < 0.5) return 1.0;
        // P[A < 1-t] = 1 - P[A > 1-t] for continuous A.
        return clamp01(a_tail(x) + 1.0 - a_tail(std::log1p(-t)));
    };
    // B <= 1 always, so log^+ B = 0.
    law.log_b_plus_tail = [](double x) { return x < 0.0 ? 1.0 : 0.0; };
    // B^+ <= 1 and D = 0 give Bbar = 1 exactly.
    law.log_ab_bar_tail = [a_tail](double x) {
        return x < 0.0 ? 1.0 : a_tail(x);
    };
    law.mu = base.mu;
    law.mu_estimated = base.mu_estimated;
    law.gamma = base.gamma;
    law.flags = LawFlags{true, false, false};
    law.uniforms_per_draw = base.uniforms_per_draw;
    law.sample = [base_sample = base.sample](RngStream& rng) {
        const LogReal a = base_sample(rng).a;
        LogReal b;
        if (a.log_mag <= 0.0) {
            // 1 - A, computed as -expm1(log A) to keep precision near A = 1.
            b = LogReal::from_double(-std::expm1(a.log_mag));
        } else {
            b = a.negate();
        }
        return InputDraw{a, b, LogReal::zero()};
    };
    return law;
}

}  // namespace tailsim
