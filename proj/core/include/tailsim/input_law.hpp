#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tailsim/log_real.hpp"
#include "tailsim/rng.hpp"

namespace tailsim {

enum class Family {
    ParetoLog,
    WeibullLog,
    DiscreteFinite,
    Deterministic,
    IndicatorCounter,
    Custom,
};

// Dependence structure of (A, B). Marginals alone do not determine tail
// constants (two laws with identical marginals can differ by a factor of 2
// in the stationary tail), so the coupling is always explicit.
enum class Coupling { BEqualsA, Independent, Joint };

std::string family_name(Family family);
std::string coupling_name(Coupling coupling);

// One joint draw of the random map coefficients: contraction factor A > 0,
// additive term B (any sign), half-width D >= 0.
struct InputDraw {
    LogReal a;
    LogReal b;
    LogReal d;
};

struct LawFlags {
    // D = 0 almost surely.
    bool d_is_zero = false;
    // B - D > 0 almost surely; the regime with an exact stationary-tail
    // constant rather than sandwich bounds.
    bool b_minus_d_positive_as = false;
    // The tail-equivalence conditions P[A v (B +- D) > x] ~ P[A v B > x]
    // and P[A > x, B - D <= -x] = o(P[A v B > x]) hold. False for bounded
    // laws (tails vanish) and for the indicator-counter law (its B drops to
    // -A exactly when A is large).
    bool tail_condition_35_holds = false;
};

using TailFn = std::function<double(double)>;

// Finite-support atom of the triple (A, B, D).
struct Atom {
    double a = 0.0;
    double b = 0.0;
    double d = 0.0;
    double prob = 0.0;
};

// A law of (A, B, D) packaged with the exact tail functions the theory and
// diagnostics layers consume. All tails are in log scale:
//   log_a_tail(x)      = P[log A > x]
//   log_ab_tail(x)     = P[log(A v B) > x]
//   log_b_plus_tail(x) = P[log^+ B > x]   (== 1 for x < 0)
//   log_ab_bar_tail(x) = P[log(A v Bbar) > x], Bbar = (B^+ + D) v 1,
// the tail driving the supremum of the perturbed random walk.
struct InputLaw {
    Family family = Family::Custom;
    Coupling coupling = Coupling::Joint;
    std::string name;

    TailFn log_a_tail;
    TailFn log_ab_tail;
    TailFn log_b_plus_tail;
    TailFn log_ab_bar_tail;

    // mu = -E[log A] > 0; the mean one-step drift down.
    double mu = 0.0;
    bool mu_estimated = false;

    // Declared exponent gamma > 0 such that E[(log^+(A v B))^(1+gamma)] is
    // finite; consumers treat it as an assertion, not a measurement.
    double gamma = 0.0;

    LawFlags flags;

    // Exact integrated tail F_I(x) = 1 ^ int_x^inf P[log(A v B) > y] dy
    // when the family admits a closed form; otherwise consumers integrate
    // log_ab_tail numerically.
    std::optional<TailFn> closed_form_fi;

    // Populated only for finite-support families; drives exact enumeration.
    std::vector<Atom> atoms;

    // Every call to sample consumes exactly this many uniforms, so sample
    // index i can be mapped to a dedicated RNG stream.
    int uniforms_per_draw = 0;

    std::function<InputDraw(RngStream&)> sample;
};

// Draws one (A, B, D) triple and enforces the support contract A > 0,
// D >= 0. Violations raise ConfigError naming the family.
InputDraw sample_input(const InputLaw& law, RngStream& rng);

// P[log A > x] = (x + shift)^(-alpha) for x >= 1 - shift: log A has a
// power-law (hence slowly varying e^x-scale) tail. Requires alpha > 1 and
// shift > alpha/(alpha - 1) so that mu = shift - alpha/(alpha - 1) > 0.
// D = 0; coupling BEqualsA sets B = A, Independent draws B as an i.i.d.
// copy. Closed-form integrated tail in both couplings.
InputLaw make_pareto_log(double alpha, double shift, Coupling coupling);

// P[log A > x] = exp(-((x + shift)/scale)^beta) for x >= -shift, with
// stretched-exponential beta in (0, 1). Requires
// shift > scale * Gamma(1 + 1/beta) so mu > 0. No closed-form integrated
// tail on purpose: this family exercises the quadrature path.
InputLaw make_weibull_log(double beta, double scale, double shift,
                          Coupling coupling);

// Finite-support law of the full triple; probabilities must sum to 1.
// Tails are exact step functions and the integrated tail is exact piecewise
// linear, so no quadrature ever runs against a discontinuous integrand.
InputLaw make_discrete_finite(std::vector<Atom> atoms);

// Point mass at (a, b, d); requires 0 < a < 1, d >= 0.
InputLaw make_deterministic(double a, double b, double d);

// The bounded-stationary example B = 1_{[0,1]}(A) - A, D = 0, driven by the
// A-marginal of a continuous base law (ParetoLog or WeibullLog with
// coupling BEqualsA). Its stationary value never exceeds 1, while A itself
// is heavy-tailed.
InputLaw make_indicator_counter(const InputLaw& base);

}  // namespace tailsim
