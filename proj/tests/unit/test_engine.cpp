#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "tailsim/engine.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/input_law.hpp"
#include "tailsim/log_real.hpp"
#include "tailsim/rng.hpp"
#include "tailsim/systems.hpp"
#include "test_helpers.hpp"

using namespace tailsim;
using tailsim::testing::close_abs;
using tailsim::testing::close_rel;
using tailsim::testing::within_se;

namespace {

LipschitzSystem half_plus_one() {
    return make_affine_system(make_deterministic(0.5, 1.0, 0.0));
}

// value within [lower - slack, upper + slack] with slack relative to the
// magnitudes involved.
bool sandwich_holds(const StationarySample& s) {
    const double lo = s.lower.to_double();
    const double hi = s.upper.to_double();
    const double v = s.value.to_double();
    const double slack =
        1e-9 * std::max({1.0, std::abs(lo), std::abs(hi), std::abs(v)});
    return v >= lo - slack && v <= hi + slack;
}

}  // namespace

TEST_CASE("contracting point-mass chain reaches its fixed point") {
    auto sys = half_plus_one();
    RngStream rng(1, 0);
    const StationarySample s = sample_perpetuity(sys, rng);
    CHECK(s.converged);
    CHECK(close_rel(s.value.to_double(), 2.0, 1e-12));
    // Depth follows from the stop rule: prefix must fall 50 log units
    // below the sample scale, and each term contributes log 2.
    CHECK(s.terms_used >= 70);
    CHECK(s.terms_used <= 76);
    CHECK(close_rel(s.lower.to_double(), 2.0, 1e-12));
    CHECK(close_rel(s.upper.to_double(), 2.0, 1e-12));
    CHECK(s.residual_log_bound < std::log(2.0) - 49.0);
}

TEST_CASE("envelope half-width widens the series sandwich") {
    auto sys = make_affine_system(make_deterministic(0.5, 1.0, 1.0));
    RngStream rng(2, 0);
    const StationarySample s = sample_perpetuity(sys, rng);
    CHECK(close_rel(s.value.to_double(), 2.0, 1e-12));
    CHECK(s.lower.is_zero());  // terms (B - D) vanish exactly
    CHECK(close_rel(s.upper.to_double(), 4.0, 1e-12));
    CHECK(sandwich_holds(s));
}

TEST_CASE("negative drift terms produce a negative fixed point") {
    auto sys = make_affine_system(make_deterministic(0.5, -3.0, 0.0));
    RngStream rng(3, 0);
    const StationarySample s = sample_perpetuity(sys, rng);
    CHECK(close_rel(s.value.to_double(), -6.0, 1e-12));
    CHECK(close_rel(s.lower.to_double(), -6.0, 1e-12));
    CHECK(s.upper.is_zero());  // B^+ + D = 0 for every draw
    CHECK(sandwich_holds(s));
}

TEST_CASE("backward composition matches the closed form fold") {
    auto sys = half_plus_one();
    RngStream rng(4, 0);
    std::vector<InputDraw> draws;
    for (int n = 1; n <= 20; ++n) {
        draws.push_back(sample_input(sys.law, rng));
        const double expect_zero = 2.0 * (1.0 - std::pow(0.5, n));
        CHECK(close_rel(
            backward_compose(sys, draws, LogReal::zero()).to_double(),
            expect_zero, 1e-13));
        const double expect_five = 2.0 + 3.0 * std::pow(0.5, n);
        CHECK(close_rel(
            backward_compose(sys, draws, LogReal::from_double(5.0))
                .to_double(),
            expect_five, 1e-13));
    }
}

TEST_CASE("forward iteration agrees with the fold and visits every step") {
    auto sys = half_plus_one();
    RngStream rng(5, 0);
    std::vector<double> seen;
    const LogReal v = forward_iterate(
        sys, rng, LogReal::zero(), 20,
        [&](std::size_t k, const LogReal& state) {
            CHECK(k == seen.size() + 1);
            seen.push_back(state.to_double());
        });
    REQUIRE(seen.size() == 20);
    CHECK(close_rel(v.to_double(), 2.0 * (1.0 - std::pow(0.5, 20)), 1e-12));
    for (std::size_t k = 1; k < seen.size(); ++k) {
        CHECK(seen[k] > seen[k - 1]);  // monotone approach from below
    }
}

TEST_CASE("composition guards against magnitude overflow") {
    InputLaw law;
    law.family = Family::Custom;
    law.name = "exploding";
    law.mu = 1.0;  // declared, never used by the overflow path
    law.uniforms_per_draw = 0;
    law.sample = [](RngStream&) {
        return InputDraw{LogReal::from_log(+1, 6e8), LogReal::one(),
                         LogReal::zero()};
    };
    auto sys = make_affine_system(law);

    std::vector<InputDraw> draws;
    RngStream rng(6, 0);
    for (int i = 0; i < 3; ++i) draws.push_back(sample_input(sys.law, rng));
    CHECK_THROWS_AS(backward_compose(sys, draws, LogReal::zero()),
                    OverflowError);

    RngStream rng2(6, 1);
    CHECK_THROWS_AS(sample_perpetuity(sys, rng2), OverflowError);
}

TEST_CASE("non-contracting series exhausts its term budget") {
    InputLaw law;
    law.family = Family::Custom;
    law.name = "unit-slope";
    law.mu = 0.0;
    law.uniforms_per_draw = 0;
    law.sample = [](RngStream&) {
        return InputDraw{LogReal::one(), LogReal::one(), LogReal::zero()};
    };
    auto sys = make_affine_system(law);
    PerpetuityOptions opts;
    opts.max_terms = 5000;
    RngStream rng(7, 0);
    CHECK_THROWS_AS(sample_perpetuity(sys, rng, opts), ConvergenceError);

    CHECK_THROWS_AS(PerpetuitySampler(sys, {0.0, 100}), ConfigError);
    CHECK_THROWS_AS(PerpetuitySampler(sys, {50.0, 0}), ConfigError);
}

TEST_CASE("requested resolution controls the series depth") {
    auto sys = half_plus_one();
    PerpetuityOptions deep;
    deep.rel_tol_log = 100.0;
    RngStream r1(8, 0);
    RngStream r2(8, 0);
    const auto coarse = sample_perpetuity(sys, r1);
    const auto fine = sample_perpetuity(sys, r2, deep);
    CHECK(fine.terms_used > coarse.terms_used);
    CHECK(fine.terms_used >= 140);
    CHECK(fine.terms_used <= 148);
}

TEST_CASE("perpetuity samples are reproducible per stream") {
    auto sys =
        make_affine_system(make_pareto_log(2.0, 4.0, Coupling::Independent));
    RngStream r1(9, 42);
    RngStream r2(9, 42);
    const auto a = sample_perpetuity(sys, r1);
    const auto b = sample_perpetuity(sys, r2);
    CHECK(a.terms_used == b.terms_used);
    CHECK(a.value == b.value);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
}

TEST_CASE("heavy-tailed samples stay inside their envelope series") {
    std::vector<LipschitzSystem> systems;
    systems.push_back(
        make_affine_system(make_pareto_log(2.0, 4.0, Coupling::BEqualsA)));
    systems.push_back(make_affine_system(make_discrete_finite(
        {{0.5, 1.0, 0.5, 0.25}, {0.25, -2.0, 0.0, 0.25}, {0.125, 0.0, 1.0, 0.5}})));
    for (std::size_t si = 0; si < systems.size(); ++si) {
        for (int i = 0; i < 500; ++i) {
            RngStream rng(10, component_stream(static_cast<int>(si), i));
            const auto s = sample_perpetuity(systems[si], rng);
            CAPTURE(systems[si].name);
            CHECK(sandwich_holds(s));
        }
    }
}

TEST_CASE("volatility recursion converges to its deterministic fixed point") {
    // v = 0.2 v + sqrt(1 + 0.09 v^2) solves to v = 1/sqrt(0.55).
    auto sys = make_arch1(0.2, 0.09, 1.0);
    RngStream rng(11, 0);
    const auto s = sample_perpetuity(sys, rng);
    CHECK(close_rel(s.value.to_double(), 1.0 / std::sqrt(0.55), 1e-10));
    CHECK(sandwich_holds(s));
    // Envelope slope is 0.2 + sqrt(0.09) = 0.5 and terms are B^+ + D = 1,
    // so the positive series sums to 2 (and the lower one to -2).
    CHECK(close_rel(s.upper.to_double(), 2.0, 1e-10));
    CHECK(close_rel(s.lower.to_double(), -2.0, 1e-10));
}

TEST_CASE("counter chain stays bounded above by one") {
    // Psi(t) = A(t-1) + 1_{[0,1]}(A) maps (-inf, 1] into itself, so the
    // stationary value never exceeds 1 even though log A is heavy-tailed.
    // Excursions below zero do happen (A > 1 sends the state negative).
    auto sys = make_affine_system(
        make_indicator_counter(make_pareto_log(2.0, 4.0, Coupling::BEqualsA)));
    double worst = -1e300;
    for (int i = 0; i < 1000; ++i) {
        RngStream rng(12, component_stream(0, i));
        const auto s = sample_perpetuity(sys, rng);
        const double v = s.value.to_double();
        worst = std::max(worst, v);
        CHECK(v <= 1.0 + 1e-9);
        CHECK(sandwich_holds(s));
    }
    CHECK(worst <= 1.0 + 1e-9);
    CHECK(worst > 0.0);  // the bound is actually approached
}

TEST_CASE("walk supremum of the point-mass law is deterministic") {
    const auto law = make_deterministic(0.5, 1.0, 0.0);
    RngStream rng(13, 0);
    const auto s = sample_sup_walk(law, rng);
    CHECK(s.m == 0.0);  // log Bbar = 0 and the walk only falls
    CHECK(s.record_index == 0);
    // Stop once n log 2 >= 60.
    CHECK(s.steps == 87);

    const auto law2 = make_deterministic(0.5, std::exp(2.0), 0.0);
    RngStream rng2(13, 1);
    const auto s2 = sample_sup_walk(law2, rng2);
    CHECK(close_abs(s2.m, 2.0, 1e-13));
    CHECK(s2.record_index == 0);
    CHECK(s2.steps >= 83);
    CHECK(s2.steps <= 85);
}

TEST_CASE("walk supremum matches the exact two-atom distribution") {
    // log A = -1 surely; log Bbar is 2 or 0 with equal probability. The
    // supremum is 2 iff the first perturbation is 2 (p = 1/2), else 1 iff
    // the second is 2 (p = 1/4), else 0.
    const auto law = make_discrete_finite(
        {{std::exp(-1.0), std::exp(2.0), 0.0, 0.5},
         {std::exp(-1.0), 1.0, 0.0, 0.5}});
    const int n = 20000;
    int above_half = 0;
    int above_three_halves = 0;
    double sum = 0.0;
    double max_m = 0.0;
    for (int i = 0; i < n; ++i) {
        RngStream rng(14, component_stream(0, i));
        const auto s = sample_sup_walk(law, rng);
        if (s.m > 0.5) ++above_half;
        if (s.m > 1.5) ++above_three_halves;
        sum += s.m;
        max_m = std::max(max_m, s.m);
    }
    CHECK(within_se(above_half / static_cast<double>(n), 0.75, n, 4.0));
    CHECK(within_se(above_three_halves / static_cast<double>(n), 0.5, n, 4.0));
    CHECK(max_m <= 2.0 + 1e-12);
    // E[M] = 2/2 + 1/4 = 1.25, sd = sqrt(0.6875).
    CHECK(close_abs(sum / n, 1.25, 4.0 * std::sqrt(0.6875 / n)));
}

TEST_CASE("walk record is dominated by the positive envelope series") {
    const auto law = make_pareto_log(2.0, 4.0, Coupling::Independent);
    RngStream rng(15, 0);
    double prefix_log = 0.0;
    double m = -1e300;
    LogReal series = LogReal::zero();
    for (int k = 0; k < 400; ++k) {
        const InputDraw d = sample_input(law, rng);
        const LogReal bbar = max(add(d.b.sign > 0 ? d.b : LogReal::zero(),
                                     d.d),
                                 LogReal::one());
        m = std::max(m, prefix_log + bbar.log_mag);
        series = add(series, mul(LogReal::from_log(+1, prefix_log), bbar));
        prefix_log += d.a.log_mag;
        CHECK(m <= series.log_mag + 1e-9);
    }
}

TEST_CASE("two-atom chain enumerates exactly") {
    auto sys = make_affine_system(make_discrete_finite(
        {{0.5, 0.0, 0.0, 0.5}, {0.5, 1.0, 0.0, 0.5}}));

    const auto e0 = enumerate_finite(sys, 0.25, 0);
    REQUIRE(e0.values.size() == 1);
    CHECK(e0.values[0] == 0.25);
    CHECK(e0.probs[0] == 1.0);

    const auto e2 = enumerate_finite(sys, 0.0, 2);
    REQUIRE(e2.values.size() == 4);
    const double expected[4] = {0.0, 0.5, 1.0, 1.5};
    for (int i = 0; i < 4; ++i) {
        CHECK(close_abs(e2.values[i], expected[i], 1e-12));
        CHECK(close_abs(e2.probs[i], 0.25, 1e-15));
    }

    const auto e10 = enumerate_finite(sys, 0.0, 10);
    CHECK(e10.values.size() == 1024);
    double total = 0.0;
    for (double p : e10.probs) total += p;
    CHECK(close_abs(total, 1.0, 1e-12));
    CHECK(e10.values.front() >= -1e-12);
    CHECK(e10.values.back() <= 2.0 * (1.0 - std::pow(0.5, 10)) + 1e-9);
    for (std::size_t i = 1; i < e10.values.size(); ++i) {
        CHECK(e10.values[i] > e10.values[i - 1]);
    }
}

TEST_CASE("enumeration merges coinciding states") {
    // Both atoms map states identically, so one state survives per step.
    auto sys = make_affine_system(make_discrete_finite(
        {{0.5, 1.0, 0.0, 0.5}, {0.5, 1.0, 0.0, 0.5}}));
    const auto e = enumerate_finite(sys, 0.0, 3);
    REQUIRE(e.values.size() == 1);
    CHECK(close_abs(e.values[0], 1.75, 1e-12));
    CHECK(close_abs(e.probs[0], 1.0, 1e-15));
}

TEST_CASE("enumeration validates its inputs and budget") {
    auto continuous =
        make_affine_system(make_pareto_log(2.0, 4.0, Coupling::BEqualsA));
    CHECK_THROWS_AS(enumerate_finite(continuous, 0.0, 3), ConfigError);

    auto sys = make_affine_system(make_discrete_finite(
        {{0.5, 0.0, 0.0, 0.5}, {0.5, 1.0, 0.0, 0.5}}));
    CHECK_THROWS_AS(enumerate_finite(sys, 0.0, 10, 100), OverflowError);
}

TEST_CASE("forward sampling reproduces the enumerated distribution") {
    auto sys = make_affine_system(make_discrete_finite(
        {{0.5, 0.0, 0.0, 0.5}, {0.5, 1.0, 0.0, 0.5}}));
    const std::size_t steps = 5;
    const auto exact = enumerate_finite(sys, 0.0, steps);
    REQUIRE(exact.values.size() == 32);

    const int runs = 100000;
    std::vector<int> counts(exact.values.size(), 0);
    for (int i = 0; i < runs; ++i) {
        RngStream rng(16, component_stream(0, i));
        const double v =
            forward_iterate(sys, rng, LogReal::zero(), steps).to_double();
        // States are spaced by at least 2^-5, so nearest match is exact.
        std::size_t best = 0;
        double best_dist = 1e300;
        for (std::size_t j = 0; j < exact.values.size(); ++j) {
            const double dist = std::abs(exact.values[j] - v);
            if (dist < best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        REQUIRE(best_dist < 1e-9);
        ++counts[best];
    }
    double tv = 0.0;
    for (std::size_t j = 0; j < exact.values.size(); ++j) {
        tv += std::abs(counts[j] / static_cast<double>(runs) -
                       exact.probs[j]);
    }
    tv *= 0.5;
    CHECK(tv < 0.02);
}
