#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "tailsim/errors.hpp"
#include "tailsim/input_law.hpp"
#include "tailsim/integrated_tail.hpp"
#include "tailsim/quadrature.hpp"
#include "test_helpers.hpp"

using namespace tailsim;
using tailsim::testing::close_rel;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed-form integrated tail of the canonical stretched-exponential law:
// int_x^inf exp(-sqrt(y+3)) dy = 2 (sqrt(x+3) + 1) exp(-sqrt(x+3)).
double weibull_fi_exact(double x) {
    const double s = std::sqrt(x + 3.0);
    return 2.0 * (s + 1.0) * std::exp(-s);
}
}  // namespace

TEST_CASE("finite-interval panels hit analytic values") {
    const auto sq = [](double x) { return x * x; };
    CHECK(close_rel(integrate(sq, 0.0, 1.0).value, 1.0 / 3.0, 1e-14));

    const auto s = [](double x) { return std::sin(x); };
    const double pi = std::acos(-1.0);
    CHECK(close_rel(integrate(s, 0.0, pi).value, 2.0, 1e-13));

    const auto p10 = [](double x) { return std::pow(x, 10); };
    CHECK(close_rel(integrate(p10, 0.0, 2.0).value, std::pow(2.0, 11) / 11.0,
                    1e-13));

    const auto steep = [](double x) { return std::exp(-50.0 * x); };
    CHECK(close_rel(integrate(steep, 0.0, 10.0).value, 1.0 / 50.0, 1e-12));
}

TEST_CASE("degenerate and reversed intervals") {
    const auto one = [](double) { return 1.0; };
    const QuadratureResult r = integrate(one, 3.0, 3.0);
    CHECK(r.value == 0.0);
    CHECK(r.converged);
    CHECK_THROWS_AS((void)integrate(one, 1.0, 0.0), DomainError);
}

TEST_CASE("upper tail integrals with exponential decay") {
    const auto e = [](double y) { return std::exp(-y); };
    CHECK(close_rel(integrate_upper_tail(e, 0.0).value, 1.0, 1e-10));
    CHECK(close_rel(integrate_upper_tail(e, 5.0).value, std::exp(-5.0),
                    1e-10));
}

TEST_CASE("upper tail integrals with power decay use extrapolation") {
    const auto pareto = [](double y) { return std::pow(y + 4.0, -2.0); };
    // int_x^inf (y+4)^-2 dy = 1/(x+4); the mass beyond any fixed cutoff is
    // first-order relevant, so this checks the geometric remainder.
    CHECK(close_rel(integrate_upper_tail(pareto, 5.0).value, 1.0 / 9.0,
                    1e-10));
    CHECK(close_rel(integrate_upper_tail(pareto, 196.0).value, 1.0 / 200.0,
                    1e-10));

    const auto heavy = [](double y) { return std::pow(y + 2.0, -1.25); };
    CHECK(close_rel(integrate_upper_tail(heavy, 0.0).value,
                    4.0 * std::pow(2.0, -0.25), 1e-9));
}

TEST_CASE("stretched-exponential tail matches the closed form to 1e-10") {
    const auto w = [](double y) { return std::exp(-std::sqrt(y + 3.0)); };
    for (double x : {0.0, 10.0, 50.0}) {
        CHECK(close_rel(integrate_upper_tail(w, x).value, weibull_fi_exact(x),
                        1e-10));
    }
}

TEST_CASE("non-integrable tails are rejected") {
    const auto harmonic = [](double y) { return 1.0 / (1.0 + y); };
    CHECK_THROWS_AS((void)integrate_upper_tail(harmonic, 0.0),
                    ConvergenceError);

    const auto floored = [](double y) {
        return std::max(1e-12, std::exp(-y));
    };
    CHECK_THROWS_AS((void)integrate_upper_tail(floored, 0.0),
                    ConvergenceError);
}

TEST_CASE("integrated tail: closed form and quadrature agree to 1e-10") {
    const InputLaw law = make_pareto_log(2.0, 4.0, Coupling::BEqualsA);
    const IntegratedTail closed = integrated_tail(law);
    const IntegratedTail quad = integrated_tail_from(law.log_ab_tail);
    CHECK(closed.source == TailSource::ClosedForm);
    CHECK(quad.source == TailSource::Quadrature);
    for (double x : {-2.0, 0.0, 5.0, 50.0, 196.0}) {
        CHECK(close_rel(closed.eval(x), quad.eval(x), 1e-10));
    }
    // Exact values.
    CHECK(close_rel(closed.eval(96.0), 0.01, 1e-12));
    CHECK(close_rel(quad.eval(96.0), 0.01, 1e-10));
}

TEST_CASE("integrated tail saturation points") {
    SUBCASE("closed-form kink at the support edge") {
        const InputLaw law = make_pareto_log(2.0, 4.0, Coupling::BEqualsA);
        const IntegratedTail fi = integrated_tail(law);
        CHECK(std::fabs(fi.saturation_x - (-3.0)) < 1e-8);
        CHECK(fi.eval(fi.saturation_x - 1e-3) == 1.0);
        CHECK(fi.eval(fi.saturation_x + 1e-3) < 1.0);
        // Continuity at the kink.
        CHECK(fi.eval(fi.saturation_x + 1e-6) > 1.0 - 1e-5);
    }
    SUBCASE("quadrature path finds the same kink") {
        const InputLaw law = make_pareto_log(2.0, 4.0, Coupling::BEqualsA);
        const IntegratedTail fi = integrated_tail_from(law.log_ab_tail);
        CHECK(std::fabs(fi.saturation_x - (-3.0)) < 1e-7);
    }
    SUBCASE("piecewise-linear ramp saturates at -3/2") {
        const auto ramp = [](double x) {
            if (x <= -1.0) return 1.0;
            if (x < 0.0) return -x;
            return 0.0;
        };
        const IntegratedTail fi = integrated_tail_from(ramp);
        CHECK(std::fabs(fi.saturation_x - (-1.5)) < 1e-7);
        CHECK(fi.eval(0.0) == 0.0);   // zero tail above 0
        CHECK(fi.eval(5.0) == 0.0);
        CHECK(close_rel(fi.eval(-0.5), 0.125, 1e-9));
    }
    SUBCASE("deterministic law: exact piecewise-linear integrated tail") {
        const InputLaw law = make_deterministic(0.5, 1.0, 0.0);
        const IntegratedTail fi = integrated_tail(law);
        CHECK(std::fabs(fi.saturation_x - (-1.0)) < 1e-8);
        CHECK(fi.eval(-2.0) == 1.0);
        CHECK(close_rel(fi.eval(-0.5), 0.5, 1e-12));
        CHECK(fi.eval(1.0) == 0.0);
    }
}

TEST_CASE("integrated tail is monotone and [0,1]-valued") {
    const InputLaw law =
        make_weibull_log(0.5, 1.0, 3.0, Coupling::BEqualsA);
    const IntegratedTail fi = integrated_tail(law);
    CHECK(fi.source == TailSource::Quadrature);
    double prev = 2.0;
    for (double x = -3.0; x <= 60.0; x += 3.0) {
        const double v = fi.eval(x);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v <= prev + 1e-12);
        prev = v;
    }
    // Against the closed form the family deliberately does not carry.
    for (double x : {5.0, 20.0, 45.0}) {
        CHECK(close_rel(fi.eval(x), weibull_fi_exact(x), 1e-10));
    }
    CHECK(fi.saturation_x > -3.0);
    CHECK(fi.saturation_x < 0.0);
    CHECK(fi.eval(fi.saturation_x - 1e-4) == 1.0);
    CHECK(fi.eval(fi.saturation_x + 1e-3) < 1.0);
}
