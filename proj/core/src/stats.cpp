#include "tailsim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "tailsim/errors.hpp"

namespace tailsim {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) {
        throw DomainError("wilson_interval: trials must be positive");
    }
    if (successes > trials) {
        throw DomainError("wilson_interval: successes exceed trials");
    }
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("wilson_interval: z must be positive and finite");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half =
        (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    // The closed form already lands in [0, 1] up to rounding; clamp the last
    // ulp so callers can rely on the invariant exactly.
    return Interval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

double ks_statistic(std::vector<double> xs, std::vector<double> ys) {
    if (xs.empty() || ys.empty()) {
        throw DomainError("ks_statistic: both samples must be non-empty");
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double nx = static_cast<double>(xs.size());
    const double ny = static_cast<double>(ys.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    // Sweep the merged order; the empirical CDF gap can only change at a
    // sample point, and ties must advance both sides before comparing.
    while (i < xs.size() && j < ys.size()) {
        const double t = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= t) ++i;
        while (j < ys.size() && ys[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx -
                                 static_cast<double>(j) / ny));
    }
    return std::max(d, 1.0 - std::min(static_cast<double>(i) / nx,
                                      static_cast<double>(j) / ny));
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
    if (n == 0 || m == 0) {
        throw DomainError("ks_critical: sample sizes must be positive");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw DomainError("ks_critical: alpha must lie in (0, 1)");
    }
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);
    return c * std::sqrt((nd + md) / (nd * md));
}

BinomialSampler::BinomialSampler(std::size_t n, double p) : n_(n), p_(p) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw DomainError("BinomialSampler: p must lie in [0, 1]");
    }
    if (n == 0 || p == 0.0 || p == 1.0) {
        // Degenerate cases: the draw is deterministic, no table needed.
        return;
    }
    const double nd = static_cast<double>(n);
    const double mean = nd * p;
    const double sd = std::sqrt(nd * p * (1.0 - p));
    const double span = 12.0 * sd + 8.0;
    const double lo = std::max(0.0, std::floor(mean - span));
    const double hi = std::min(nd, std::ceil(mean + span));
    first_ = static_cast<std::size_t>(lo);
    const std::size_t last = static_cast<std::size_t>(hi);

    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double lg_n1 = std::lgamma(nd + 1.0);
    double cum = 0.0;
    cdf_.reserve(last - first_ + 1);
    for (std::size_t k = first_; k <= last; ++k) {
        const double kd = static_cast<double>(k);
        const double log_pmf = lg_n1 - std::lgamma(kd + 1.0) -
                               std::lgamma(nd - kd + 1.0) + kd * log_p +
                               (nd - kd) * log_q;
        cum += std::exp(log_pmf);
        cdf_.push_back(cum);
    }
    // The window holds all but ~1e-32 of the mass; pin the last entry to 1
    // so a uniform near 1 cannot fall off the table.
    cdf_.back() = 1.0;
}

std::size_t BinomialSampler::sample(RngStream& rng) const {
    const double u = rng.next_double();
    if (cdf_.empty()) {
        return p_ == 1.0 ? n_ : 0;
    }
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return first_ + static_cast<std::size_t>(it - cdf_.begin());
}

std::size_t binomial_sample(std::size_t n, double p, RngStream& rng) {
    return BinomialSampler(n, p).sample(rng);
}

}  // namespace tailsim
