#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tailsim/diagnostics.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/input_law.hpp"
#include "test_helpers.hpp"

using namespace tailsim;
using tailsim::testing::close_rel;

namespace {

// Pareto density with index 2 on [1, hi], sampled on a log grid. The grid
// runs far past the probe range so truncation does not distort tail ratios.
GridDensity pareto2_density(double hi, double dln) {
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

}  // namespace

TEST_CASE("spacing helpers produce inclusive endpoints") {
    auto lin = linear_spaced(0.0, 1.0, 5);
    REQUIRE(lin.size() == 5);
    CHECK(lin.front() == 0.0);
    CHECK(lin.back() == 1.0);
    CHECK(close_rel(lin[2], 0.5, 1e-15));

    auto lg = log_spaced(1.0, 100.0, 3);
    REQUIRE(lg.size() == 3);
    CHECK(lg.front() == 1.0);
    CHECK(close_rel(lg[1], 10.0, 1e-12));
    CHECK(lg.back() == 100.0);

    CHECK_THROWS_AS(linear_spaced(1.0, 0.0, 5), DomainError);
    CHECK_THROWS_AS(log_spaced(0.0, 1.0, 5), DomainError);
    CHECK_THROWS_AS(log_spaced(1.0, 2.0, 1), DomainError);
}

TEST_CASE("heavy power tail is consistent with the long-tailed class") {
    auto law = make_pareto_log(2.0, 4.0, Coupling::BEqualsA);
    const std::vector<double> shifts{1.0, 5.0, 10.0};
    const std::vector<double> grid{10.0, 20.0, 50.0, 100.0, 200.0, 400.0};
    auto report = check_long_tailed(law.log_ab_tail, shifts, grid);
    CHECK(report.verdict == "consistent with L");
    REQUIRE(report.rows.size() == shifts.size() * grid.size());
    // Each ratio matches the closed form ((x+4)/(x+y+4))^2.
    std::size_t k = 0;
    for (double y : shifts) {
        for (double x : grid) {
            const double expected =
                std::pow((x + 4.0) / (x + y + 4.0), 2.0);
            CHECK(close_rel(report.rows[k].value, expected, 1e-12));
            CHECK(report.rows[k].x == x);
            CHECK(report.rows[k].y == y);
            ++k;
        }
    }
}

TEST_CASE("stretched exponential tail is consistent with L") {
    auto law = make_weibull_log(0.5, 1.0, 3.0, Coupling::BEqualsA);
    // Ratios approach 1 like exp(-y / (2 sqrt(x))), so shift 3 needs the
    // grid to reach about 1000 before it enters the 5% terminal band.
    auto report = check_long_tailed(law.log_a_tail, {1.0, 3.0},
                                    {10.0, 50.0, 200.0, 500.0, 1000.0});
    CHECK(report.verdict == "consistent with L");
}

TEST_CASE("light exponential tail is rejected from L") {
    TailFn tail = [](double x) { return std::exp(-std::max(x, 0.0)); };
    auto report = check_long_tailed(tail, {1.0}, {5.0, 10.0, 20.0, 40.0});
    // Ratio is exactly exp(-1) at every x: flat, but far from 1.
    CHECK(report.verdict == "not in L");
    for (const auto& row : report.rows) {
        CHECK(close_rel(row.value, std::exp(-1.0), 1e-12));
    }
}

TEST_CASE("bounded tail raises instead of producing a verdict") {
    TailFn tail = [](double x) { return std::max(0.0, 1.0 - x / 10.0); };
    CHECK_THROWS_WITH_AS(check_long_tailed(tail, {1.0}, {5.0, 12.0}),
                         doctest::Contains("tail vanishes"), DomainError);
    CHECK_THROWS_AS(check_long_tailed(tail, {-1.0}, {5.0}), DomainError);
    CHECK_THROWS_AS(check_long_tailed(tail, {1.0}, {}), DomainError);
}

TEST_CASE("pareto density is consistent with the subexponential class") {
    auto density = pareto2_density(1e10, 5e-5);
    auto report = check_subexponential(density, 1e6);
    CHECK(report.verdict == "consistent with S");
    REQUIRE(!report.ratios.empty());
    // Exact two-fold ratio at the terminal point is 2 + 8/x + O(1/x^2).
    CHECK(report.ratios.back() > 1.9);
    CHECK(report.ratios.back() < 2.1);
    CHECK(std::abs(report.ratios.back() - 2.0) < 1e-3);
    CHECK(report.tail_at_x_max > 0.0);
    // Ratios over the last decade hug 2 (exact value is 2 + 6/x).
    for (std::size_t i = 0; i < report.xs.size(); ++i) {
        if (report.xs[i] < 1e5) continue;
        CHECK(report.ratios[i] > 1.99);
        CHECK(report.ratios[i] < 2.01);
    }
}

TEST_CASE("exponential density is not consistent with S") {
    auto density = exponential_density(48.0, 2e-4);
    auto report = check_subexponential(density, 40.0);
    CHECK(report.verdict == "not consistent with S");
    // Known two-fold convolution ratio for the unit exponential is 1 + x.
    CHECK(close_rel(report.ratios.back(), 41.0, 1e-2));
}

TEST_CASE("bounded density triggers the vanished-tail error") {
    GridDensity d;
    d.xs = linear_spaced(0.0, 1.0, 20001);
    d.fs.assign(d.xs.size(), 1.0);
    CHECK_THROWS_WITH_AS(check_subexponential(d, 1.0),
                         doctest::Contains("tail vanishes"), DomainError);
}

TEST_CASE("coarse grids are refused with the required resolution") {
    GridDensity d;
    d.xs = linear_spaced(0.0, 2.0, 101);
    d.fs.assign(d.xs.size(), 0.5);
    CHECK_THROWS_WITH_AS(check_subexponential(d, 1.5),
                         doctest::Contains("grid too coarse"), DomainError);
}

TEST_CASE("badly resolved curvature near the tail is refused") {
    // Piecewise-linear density: a unit triangle on [0, 2] carrying almost
    // all mass, plus a narrow spike at 4.5 holding the tail mass past
    // x_max = 4. All kinks sit on grid nodes so the trapezoid mass is
    // exact, but the spike is only two panels wide, so the curvature
    // estimate at x_max blows past 1% of the tiny tail.
    const double h = 4e-4;
    const double m = 1e-5;
    const double w = 2.0 * h;
    GridDensity d;
    d.xs = linear_spaced(0.0, 6.0, 15001);
    d.fs.assign(d.xs.size(), 0.0);
    for (std::size_t i = 0; i < d.xs.size(); ++i) {
        const double t = d.xs[i];
        double f = 0.0;
        if (t <= 1.0) {
            f = t;
        } else if (t <= 2.0) {
            f = 2.0 - t;
        }
        f *= 1.0 - m;
        const double dist = std::abs(t - 4.5);
        if (dist < w) f += (m / w) * (1.0 - dist / w);
        d.fs[i] = f;
    }
    CHECK_THROWS_WITH_AS(check_subexponential(d, 4.0),
                         doctest::Contains("grid too coarse"), DomainError);
}

TEST_CASE("subexponential check validates its density") {
    GridDensity d;
    d.xs = linear_spaced(0.0, 1.0, 20001);
    d.fs.assign(d.xs.size(), 0.9);  // mass 0.9, not a density
    CHECK_THROWS_WITH_AS(check_subexponential(d, 0.5),
                         doctest::Contains("integrates to"), DomainError);

    GridDensity tiny;
    tiny.xs = {0.0, 1.0};
    tiny.fs = {1.0, 1.0};
    CHECK_THROWS_AS(check_subexponential(tiny, 0.5), DomainError);

    GridDensity neg;
    neg.xs = linear_spaced(0.0, 1.0, 20001);
    neg.fs.assign(neg.xs.size(), 1.0);
    neg.fs[5] = -0.5;
    CHECK_THROWS_AS(check_subexponential(neg, 0.5), DomainError);
}

TEST_CASE("potter bound holds for the power tail above a threshold") {
    auto law = make_pareto_log(2.0, 4.0, Coupling::BEqualsA);
    const std::vector<double> values{1.0, 2.0, 5.0, 10.0, 12.0,
                                     16.0, 20.0, 35.0, 50.0};
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            pairs.emplace_back(values[i], values[j]);
        }
    }
    auto report = potter_check(law.log_ab_tail, 2.0, 0.1, pairs);
    REQUIRE(report.threshold.has_value());
    CHECK(*report.threshold <= 10.0);
    // No violations once both coordinates reach 10.
    for (const auto& row : report.rows) {
        if (std::min(row.x, row.y) >= 10.0) {
            CHECK(row.verdict == "ok");
            CHECK(row.value <= row.bound);
        }
    }
    // But violations do exist lower down, so the threshold is meaningful.
    bool any_violation = false;
    for (const auto& row : report.rows) {
        if (row.verdict == "violation") any_violation = true;
    }
    CHECK(any_violation);
}

TEST_CASE("gaussian-type tail never stabilizes under the potter bound") {
    TailFn tail = [](double x) { return std::exp(-x * x); };
    std::vector<std::pair<double, double>> pairs;
    for (int x = 1; x <= 6; ++x) {
        pairs.emplace_back(static_cast<double>(x), static_cast<double>(x) + 1.0);
    }
    auto report = potter_check(tail, 2.0, 0.1, pairs);
    CHECK(!report.threshold.has_value());
    for (const auto& row : report.rows) CHECK(row.verdict == "violation");

    CHECK_THROWS_AS(potter_check(tail, 0.0, 0.1, pairs), DomainError);
    CHECK_THROWS_AS(potter_check(tail, 2.0, -1.0, pairs), DomainError);
    CHECK_THROWS_AS(potter_check(tail, 2.0, 0.1, {}), DomainError);
}

TEST_CASE("equivalent-tail convolution scales the reference tail") {
    TailFn ref = [](double x) { return std::min(1.0, 1.0 / (x + 4.0)); };
    TailFn t1 = [&](double x) { return ref(x); };
    TailFn t2 = [&](double x) { return 2.0 * ref(x); };

    CHECK(close_rel(convolve_equiv_tails({{t1, 1.0}, {t2, 2.0}}, ref, 96.0),
                    0.03, 1e-12));
    CHECK(close_rel(convolve_equiv_tails({{t1, 1.0}}, ref, 96.0), 0.01,
                    1e-12));

    CHECK_THROWS_WITH_AS(
        convolve_equiv_tails({{t1, 0.0}, {t2, 0.0}}, ref, 10.0),
        doctest::Contains("degenerate"), DomainError);
    CHECK_THROWS_AS(convolve_equiv_tails({{t1, -1.0}}, ref, 10.0),
                    DomainError);
    CHECK_THROWS_AS(convolve_equiv_tails({}, ref, 10.0), DomainError);
}
