#include "tailsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>

#include "tailsim/errors.hpp"

namespace tailsim {
namespace {

constexpr double kLongTailBand = 0.05;   // terminal |ratio - 1| allowance
constexpr double kDensityMassTol = 1e-8; // trapezoid mass must hit 1
constexpr double kSubexpLo = 1.9;        // acceptable terminal ratio band
constexpr double kSubexpHi = 2.1;

void require_increasing(const std::vector<double>& xs, const char* what) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!(xs[i] < xs[i + 1])) {
            throw DomainError(std::string(what) +
                              " must be strictly increasing");
        }
    }
}

// Trapezoid mass of the density over its whole grid.
double trapezoid_mass(const GridDensity& d) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < d.xs.size(); ++i) {
        total += 0.5 * (d.fs[i] + d.fs[i + 1]) * (d.xs[i + 1] - d.xs[i]);
    }
    return total;
}

// Right-cumulated trapezoid tail of a grid density, plus evaluation that is
// consistent with the panel sums (piecewise-quadratic between nodes).
struct GridTail {
    const GridDensity* d;
    std::vector<double> cum;  // cum[i] = integral of f over [x_i, x_end]

    explicit GridTail(const GridDensity& density) : d(&density) {
        const std::size_t n = density.xs.size();
        cum.assign(n, 0.0);
        for (std::size_t i = n - 1; i-- > 0;) {
            cum[i] = cum[i + 1] + 0.5 * (density.fs[i] + density.fs[i + 1]) *
                                      (density.xs[i + 1] - density.xs[i]);
        }
    }

    // Tail at s given the panel index i with x_i <= s (hint may be stale;
    // it is advanced/rewound as needed so sweeps in either direction stay
    // O(1) amortized).
    double eval_with_hint(double s, std::size_t& hint) const {
        const std::vector<double>& xs = d->xs;
        const std::vector<double>& fs = d->fs;
        const std::size_t n = xs.size();
        if (s <= xs.front()) return cum.front();
        if (s >= xs.back()) return 0.0;
        if (hint >= n - 1) hint = n - 2;
        while (xs[hint + 1] <= s) ++hint;
        while (xs[hint] > s) --hint;
        // Remaining piece of the panel [s, x_{hint+1}] by trapezoid with the
        // density interpolated linearly at s.
        const double h = xs[hint + 1] - xs[hint];
        const double w = (s - xs[hint]) / h;
        const double f_s = fs[hint] + w * (fs[hint + 1] - fs[hint]);
        return cum[hint + 1] + 0.5 * (f_s + fs[hint + 1]) * (xs[hint + 1] - s);
    }

    double eval(double s) const {
        std::size_t hint = 0;
        return eval_with_hint(s, hint);
    }
};

// Linear interpolation of the density itself; 0 outside the grid.
double density_at(const GridDensity& d, double t, std::size_t& hint) {
    const std::vector<double>& xs = d.xs;
    const std::size_t n = xs.size();
    if (t < xs.front() || t > xs.back()) return 0.0;
    if (hint >= n - 1) hint = n - 2;
    while (xs[hint + 1] < t) ++hint;
    while (xs[hint] > t) --hint;
    const double w = (t - xs[hint]) / (xs[hint + 1] - xs[hint]);
    return d.fs[hint] + w * (d.fs[hint + 1] - d.fs[hint]);
}

// Two-fold convolution tail P[X1 + X2 > x] = integral of f(t) tail(x - t).
// Split into three ranges so each is integrated where it is resolved:
//   far field  t in [front, x - s_hi]: tail(x - t) varies slowly, trapezoid
//     on the density's own t nodes;
//   boundary   s = x - t in [front, s_hi]: tail decays on a short scale
//     that wide t panels cannot see, so integrate in s on the grid's front
//     nodes where the cumulated tail is exact;
//   remainder  t >= x - front: tail factor is the constant full mass.
double convolve_at(const GridDensity& d, const GridTail& tail, double x,
                   double mass) {
    const std::vector<double>& xs = d.xs;
    const std::vector<double>& fs = d.fs;
    const std::size_t n = xs.size();
    const double front = xs.front();
    const double t_star = x - front;
    if (t_star <= front) return tail.cum.front() * mass;

    // Boundary-layer edge: a grid node near min(x/100, t_star).
    const double s_target = std::min(x / 100.0, t_star);
    std::size_t j = 0;
    while (j + 1 < n && xs[j + 1] <= s_target) ++j;

    if (j < 2) {
        // Degenerate layer (possible only for probes a few panels from the
        // support edge): plain trapezoid with the panel containing t_star
        // split at the slope break of the tail factor.
        double conv = 0.0;
        std::size_t hint = n - 2;
        double prev_g = fs[0] * tail.eval_with_hint(x - xs[0], hint);
        for (std::size_t i = 1; i < n; ++i) {
            const double gi = fs[i] * tail.eval_with_hint(x - xs[i], hint);
            if (xs[i - 1] < t_star && t_star < xs[i]) {
                const double w =
                    (t_star - xs[i - 1]) / (xs[i] - xs[i - 1]);
                const double g_star =
                    (fs[i - 1] + w * (fs[i] - fs[i - 1])) * tail.cum.front();
                conv += 0.5 * (prev_g + g_star) * (t_star - xs[i - 1]);
                conv += 0.5 * (g_star + gi) * (xs[i] - t_star);
            } else {
                conv += 0.5 * (prev_g + gi) * (xs[i] - xs[i - 1]);
            }
            prev_g = gi;
        }
        return conv;
    }

    const double s_hi = xs[j];
    const double t_lo = x - s_hi;
    double conv = 0.0;

    // Far field on t nodes up to t_lo, then a partial panel ending exactly
    // at t_lo (where s = s_hi is a node, so the tail value is exact).
    std::size_t tail_hint = n - 2;
    std::size_t last = 0;
    double prev_g = fs[0] * tail.eval_with_hint(x - xs[0], tail_hint);
    for (std::size_t i = 1; i < n && xs[i] <= t_lo; ++i) {
        const double gi = fs[i] * tail.eval_with_hint(x - xs[i], tail_hint);
        conv += 0.5 * (prev_g + gi) * (xs[i] - xs[i - 1]);
        prev_g = gi;
        last = i;
    }
    if (xs[last] < t_lo) {
        std::size_t fh = last;
        const double g_lo = density_at(d, t_lo, fh) * tail.cum[j];
        conv += 0.5 * (prev_g + g_lo) * (t_lo - xs[last]);
    }

    // Boundary layer in s over nodes 0..j; the tail at node s_i is cum[i].
    {
        std::size_t fh = n - 2;
        double prev_q = density_at(d, x - xs[j], fh) * tail.cum[j];
        for (std::size_t i = j; i-- > 0;) {
            const double qi = density_at(d, x - xs[i], fh) * tail.cum[i];
            conv += 0.5 * (prev_q + qi) * (xs[i + 1] - xs[i]);
            prev_q = qi;
        }
    }

    // Remainder: everything past t_star carries the full tail mass.
    if (t_star < xs.back()) {
        std::size_t k = 0;
        while (k + 1 < n && xs[k + 1] <= t_star) ++k;
        std::size_t fh = k;
        double prev_r = density_at(d, t_star, fh);
        double rem = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            rem += 0.5 * (prev_r + fs[i]) * (xs[i] - std::max(xs[i - 1], t_star));
            prev_r = fs[i];
        }
        conv += rem * tail.cum.front();
    }
    return conv;
}

}  // namespace

std::vector<double> linear_spaced(double a, double b, std::size_t n) {
    if (n < 2 || !(a < b)) {
        throw DomainError("linear_spaced requires n >= 2 and a < b");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a + (b - a) * static_cast<double>(i) /
                         static_cast<double>(n - 1);
    }
    out.back() = b;
    return out;
}

std::vector<double> log_spaced(double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(a < b) || n < 2) {
        throw DomainError("log_spaced requires 0 < a < b and n >= 2");
    }
    const double la = std::log(a);
    const double lb = std::log(b);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(la + (lb - la) * static_cast<double>(i) /
                                   static_cast<double>(n - 1));
    }
    out.front() = a;
    out.back() = b;
    return out;
}

LongTailReport check_long_tailed(const TailFn& tail,
                                 const std::vector<double>& shifts,
                                 const std::vector<double>& grid) {
    if (shifts.empty() || grid.empty()) {
        throw DomainError("long-tail check needs at least one shift and one "
                          "grid point");
    }
    require_increasing(grid, "long-tail grid");
    for (double y : shifts) {
        if (!(y > 0.0)) {
            throw DomainError("long-tail shifts must be positive");
        }
    }

    LongTailReport report;
    bool all_columns_pass = true;
    for (double y : shifts) {
        double prev_dist = std::numeric_limits<double>::infinity();
        bool monotone = true;
        double last_dist = std::numeric_limits<double>::infinity();
        for (double x : grid) {
            const double denom = tail(x);
            const double numer = tail(x + y);
            if (!(denom > 0.0)) {
                throw DomainError("tail vanishes: not in L on this range");
            }
            const double ratio = numer / denom;
            const double dist = std::abs(ratio - 1.0);
            // Small slack so exactly flat columns are not rejected for
            // rounding noise.
            if (dist > prev_dist * (1.0 + 1e-9) + 1e-12) monotone = false;
            prev_dist = dist;
            last_dist = dist;
            report.rows.push_back({x, y, ratio, 1.0, ""});
        }
        if (!monotone || last_dist > kLongTailBand) all_columns_pass = false;
    }
    report.verdict = all_columns_pass ? "consistent with L" : "not in L";
    for (DiagRow& row : report.rows) row.verdict = report.verdict;
    return report;
}

SubexpReport check_subexponential(const GridDensity& density, double x_max) {
    const std::size_t n = density.xs.size();
    if (n < 3 || density.fs.size() != n) {
        throw DomainError("grid density needs matching xs/fs with at least "
                          "3 points");
    }
    require_increasing(density.xs, "grid density abscissae");
    for (double f : density.fs) {
        if (!(f >= 0.0) || !std::isfinite(f)) {
            throw DomainError("grid density values must be finite and "
                              "nonnegative");
        }
    }
    const double mass = trapezoid_mass(density);
    if (std::abs(mass - 1.0) > kDensityMassTol) {
        std::ostringstream msg;
        msg << "grid density integrates to " << mass
            << "; must equal 1 within " << kDensityMassTol;
        throw DomainError(msg.str());
    }
    if (!(x_max > 0.0) || !(x_max > density.xs.front())) {
        throw DomainError("x_max must be positive and inside the grid");
    }

    // Resolution rule, part 1: panel width over the measured range. Panels
    // past x_max only close the far tail and may be coarser.
    double h_measured = 0.0;
    for (std::size_t i = 0; i + 1 < n && density.xs[i] < x_max; ++i) {
        h_measured = std::max(h_measured, density.xs[i + 1] - density.xs[i]);
    }
    const double h_required = x_max * 1e-4;
    if (h_measured > h_required) {
        std::ostringstream msg;
        msg << "grid too coarse: max step " << h_measured << " below x_max"
            << " exceeds required resolution " << h_required;
        throw DomainError(msg.str());
    }

    const GridTail tail(density);
    const double tail_x_max = tail.eval(x_max);
    if (!(tail_x_max > 0.0)) {
        throw DomainError("tail vanishes at x_max: distribution is bounded "
                          "on this range");
    }

    // Resolution rule, part 2: second-difference estimate of the trapezoid
    // error in the convolution integrand at x_max. Per-panel trapezoid
    // error is h^3 |g''| / 12; g'' is estimated by divided differences.
    double err_est = 0.0;
    {
        std::vector<double> g(n);
        std::size_t hint = n - 2;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = density.fs[i] * tail.eval_with_hint(x_max - density.xs[i],
                                                       hint);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = density.xs[i] - density.xs[i - 1];
            const double hr = density.xs[i + 1] - density.xs[i];
            const double d2 = 2.0 *
                              ((g[i + 1] - g[i]) / hr - (g[i] - g[i - 1]) / hl) /
                              (hl + hr);
            const double h = std::max(hl, hr);
            err_est += h * h * h / 12.0 * std::abs(d2);
        }
    }
    const double err_allowed = 0.01 * tail_x_max;
    if (err_est >= err_allowed) {
        std::ostringstream msg;
        msg << "grid too coarse: convolution error estimate " << err_est
            << " exceeds 1% of the tail at x_max (" << err_allowed
            << "); refine the step by about "
            << std::sqrt(err_est / err_allowed);
        throw DomainError(msg.str());
    }

    // Probe the ratio curve on log-spaced points up to x_max. The
    // convolution tail P[X1 + X2 > x] = integral of f(t) tail(x - t) dt is
    // evaluated per probe with a moving panel cursor (x - t is monotone in
    // t), so each probe costs one sweep of the grid.
    SubexpReport report;
    double lo = std::max(x_max * 1e-3, density.xs.front());
    if (!(lo > 0.0)) lo = x_max * 1e-3;
    report.xs = log_spaced(lo, x_max, 33);
    report.ratios.reserve(report.xs.size());
    for (double x : report.xs) {
        report.ratios.push_back(convolve_at(density, tail, x, mass) /
                                tail.eval(x));
    }

    const double terminal = report.ratios.back();
    bool ok = terminal >= kSubexpLo && terminal <= kSubexpHi;
    // Last decade must move monotonically toward 2 (small slack for
    // quadrature noise).
    double prev_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < report.xs.size(); ++i) {
        if (report.xs[i] < x_max / 10.0) continue;
        const double dist = std::abs(report.ratios[i] - 2.0);
        if (dist > prev_dist + 1e-7 + 1e-6 * prev_dist) ok = false;
        prev_dist = dist;
    }
    report.verdict = ok ? "consistent with S" : "not consistent with S";
    report.tail_at_x_max = tail_x_max;
    report.error_estimate = err_est;
    return report;
}

PotterReport potter_check(const TailFn& tail, double delta_cap,
                          double delta_exp,
                          const std::vector<std::pair<double, double>>& grid) {
    if (!(delta_cap > 0.0) || !(delta_exp >= 0.0)) {
        throw DomainError("potter_check requires delta_cap > 0 and "
                          "delta_exp >= 0");
    }
    if (grid.empty()) {
        throw DomainError("potter_check requires at least one pair");
    }

    PotterReport report;
    std::vector<double> pair_min(grid.size());
    std::vector<bool> pair_ok(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i].first;
        const double y = grid[i].second;
        const double tx = tail(x);
        const double ty = tail(y);
        const double bound = delta_cap * std::exp(delta_exp * std::abs(x - y));
        double worst;
        if (tx > 0.0 && ty > 0.0) {
            worst = std::max(tx / ty, ty / tx);
        } else {
            // A vanished tail cannot satisfy a two-sided ratio bound.
            worst = std::numeric_limits<double>::infinity();
        }
        const bool ok = worst <= bound;
        pair_min[i] = std::min(x, y);
        pair_ok[i] = ok;
        report.rows.push_back({x, y, worst, bound, ok ? "ok" : "violation"});
    }

    // Smallest tested abscissa X such that every pair living entirely at or
    // above X passes. Candidates are the pair minima themselves, so the
    // surviving set is never vacuous.
    std::vector<double> candidates = pair_min;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    for (double c : candidates) {
        bool all_ok = true;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (pair_min[i] >= c && !pair_ok[i]) {
                all_ok = false;
                break;
            }
        }
        if (all_ok) {
            report.threshold = c;
            break;
        }
    }
    return report;
}

double convolve_equiv_tails(
    const std::vector<std::pair<TailFn, double>>& components,
    const TailFn& reference, double x) {
    if (components.empty()) {
        throw DomainError("convolution prediction needs at least one "
                          "component");
    }
    double weight_sum = 0.0;
    for (const auto& [component_tail, weight] : components) {
        if (!component_tail) {
            throw DomainError("convolution prediction received an empty "
                              "component tail");
        }
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw DomainError("component weights must be finite and "
                              "nonnegative");
        }
        weight_sum += weight;
    }
    if (!(weight_sum > 0.0)) {
        throw DomainError("degenerate component weights: at least one must "
                          "be positive");
    }
    return weight_sum * reference(x);
}

}  // namespace tailsim
