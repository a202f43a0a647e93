#pragma once

#include <cstddef>
#include <vector>

#include "tailsim/rng.hpp"

namespace tailsim {

// Two-sided 95% normal quantile used for every confidence interval in the
// library. Pinned to full double precision so interval endpoints are
// bit-stable across platforms.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double p) const { return lo <= p && p <= hi; }
};

// Wilson score interval for a binomial proportion. Unlike the Wald interval
// it keeps honest coverage when successes are scarce, which is the normal
// situation for tail probabilities; it also never leaves [0, 1].
Interval wilson_interval(std::size_t successes, std::size_t trials,
                         double z = kZ95);

// Two-sample Kolmogorov-Smirnov statistic: the sup-distance between the two
// empirical CDFs. Inputs need not be sorted.
double ks_statistic(std::vector<double> xs, std::vector<double> ys);

// Rejection threshold for the two-sample KS test at significance alpha,
// using the asymptotic distribution of the statistic:
//   D_crit = sqrt(-ln(alpha/2) / 2) * sqrt((n + m) / (n m)).
double ks_critical(std::size_t n, std::size_t m, double alpha);

// Exact Binomial(n, p) sampler by inverse CDF. The pmf is evaluated through
// lgamma on a window of +-12 standard deviations around the mean (the mass
// outside is far below one ulp), the CDF is tabulated once, and each draw
// consumes exactly one uniform and binary-searches the table. Fixed uniform
// consumption keeps counter-based streams alignment-free.
class BinomialSampler {
public:
    BinomialSampler(std::size_t n, double p);

    std::size_t sample(RngStream& rng) const;

    std::size_t n() const { return n_; }
    double p() const { return p_; }

private:
    std::size_t n_;
    double p_;
    std::size_t first_ = 0;          // smallest k in the tabulated window
    std::vector<double> cdf_;        // cdf_[i] = P[X <= first_ + i]
};

// One-off convenience wrapper around BinomialSampler.
std::size_t binomial_sample(std::size_t n, double p, RngStream& rng);

}  // namespace tailsim
