#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailsim/input_law.hpp"

namespace tailsim {

// Density sampled on a (possibly nonuniform) strictly increasing grid.
// Validated at use: nonnegative values, trapezoid integral within 1e-8
// of 1. The grid may extend well past the range under study; for slowly
// decaying tails it must, or truncation distorts the measured ratios.
struct GridDensity {
    std::vector<double> xs;
    std::vector<double> fs;
};

std::vector<double> linear_spaced(double a, double b, std::size_t n);
std::vector<double> log_spaced(double a, double b, std::size_t n);

// Row shape shared by all diagnostic tables (CSV columns x, y, value,
// bound, verdict).
struct DiagRow {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
    double bound = 0.0;
    std::string verdict;
};

struct LongTailReport {
    // One row per (grid point, shift): value = tail(x+y)/tail(x).
    std::vector<DiagRow> rows;
    std::string verdict;  // "consistent with L" or "not in L"
};

// Long-tail diagnostic: tail(x+y)/tail(x) must approach 1 monotonically in
// x for every shift y, landing within 0.05 of 1 at the largest grid point.
// Throws DomainError "tail vanishes..." if the tail is 0 anywhere on the
// evaluation range.
LongTailReport check_long_tailed(const TailFn& tail,
                                 const std::vector<double>& shifts,
                                 const std::vector<double>& grid);

struct SubexpReport {
    std::vector<double> xs;      // probe points, increasing
    std::vector<double> ratios;  // two-fold convolution tail / tail
    std::string verdict;  // "consistent with S" or "not consistent with S"
    double tail_at_x_max = 0.0;
    double error_estimate = 0.0;  // trapezoid error bound at x_max
};

// Subexponentiality diagnostic: estimates P[X1 + X2 > x] / P[X > x] by
// trapezoid convolution on the density grid and probes the curve up to
// x_max. Verdict requires the terminal ratio in [1.9, 2.1] and the last
// decade monotone toward 2. Refuses (DomainError) when the grid violates
// the resolution rule: spacing over [0, x_max] must not exceed
// x_max * 1e-4, and the second-difference trapezoid error estimate at
// x_max must stay below 1% of the tail there.
SubexpReport check_subexponential(const GridDensity& density, double x_max);

struct PotterReport {
    // Smallest tested abscissa X such that no violation occurs among pairs
    // with both coordinates >= X; absent when violations persist at every
    // scale.
    std::optional<double> threshold;
    std::vector<DiagRow> rows;  // value = worst direction ratio, bound =
                                // delta_cap * exp(delta_exp * |x - y|)
};

// Two-sided ratio bound check: tail(x)/tail(y) <= delta_cap *
// exp(delta_exp |x - y|) in both orientations for each tested pair.
PotterReport potter_check(const TailFn& tail, double delta_cap,
                          double delta_exp,
                          const std::vector<std::pair<double, double>>& grid);

// Asymptotic-equivalence prediction for a sum of independent terms whose
// tails are each equivalent to c_i * reference: returns
// (sum_i c_i) * reference(x).
double convolve_equiv_tails(
    const std::vector<std::pair<TailFn, double>>& components,
    const TailFn& reference, double x);

}  // namespace tailsim
