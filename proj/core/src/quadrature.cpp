#include "tailsim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEstimate {
    double value;
    double error;
};

PanelEstimate gk15(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    // QUADPACK-style sharpened error estimate.
    const double diff = std::fabs(kronrod - gauss);
    const double err = diff == 0.0
                           ? 0.0
                           : diff * std::min(1.0, std::pow(200.0 * diff /
                                                               std::max(std::fabs(kronrod), 1e-300),
                                                           1.5));
    return PanelEstimate{kronrod, std::max(err, diff * 1e-6)};
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace

QuadratureResult integrate(const Integrand& f, double a, double b,
                           double rel_tol, double abs_tol,
                           int max_subdivisions) {
    QuadratureResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    if (!(a < b)) throw DomainError("integrate: interval endpoints reversed");

    std::priority_queue<Interval> heap;
    const PanelEstimate first = gk15(f, a, b);
    res.evaluations = 15;
    heap.push(Interval{a, b, first.value, first.error});
    double total = first.value;
    double total_err = first.error;

    for (int iter = 0; iter < max_subdivisions; ++iter) {
        const double tol = std::max(abs_tol, rel_tol * std::fabs(total));
        if (total_err <= tol) break;
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval at double resolution; nothing left to split.
            heap.push(worst);
            break;
        }
        const PanelEstimate left = gk15(f, worst.a, mid);
        const PanelEstimate right = gk15(f, mid, worst.b);
        res.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(Interval{worst.a, mid, left.value, left.error});
        heap.push(Interval{mid, worst.b, right.value, right.error});
    }

    res.value = total;
    res.abs_error = total_err;
    res.converged =
        total_err <= std::max(abs_tol, rel_tol * std::fabs(total));
    return res;
}

QuadratureResult integrate_upper_tail(const Integrand& f, double x,
                                      double rel_tol, double abs_tol) {
    // Scan geometrically for the cutoff where the integrand is negligible.
    const double unit = 1.0 + std::fabs(x);
    double offset = unit;
    double cut = x + offset;
    bool found = false;
    for (int k = 0; k < 62; ++k) {
        if (f(cut) < kTailCutoffLevel) {
            found = true;
            break;
        }
        offset *= 2.0;
        cut = x + offset;
    }
    if (!found) {
        throw ConvergenceError(
            "integrate_upper_tail: integrand never fell below the cutoff "
            "level; tail integral does not converge numerically");
    }

    // Log-spaced panels of doubling width covering [x, cut]; the last panel
    // may overshoot the cutoff (the integrand is negligible there). Full
    // widths keep the panel-value ratios meaningful for extrapolation.
    QuadratureResult total;
    total.converged = true;
    std::vector<double> panel_values;
    double lo = x;
    double step = unit;
    while (lo < cut) {
        const double hi = lo + step;
        const QuadratureResult part =
            integrate(f, lo, hi, rel_tol * 0.1, 0.0, 400);
        total.value += part.value;
        total.abs_error += part.abs_error;
        total.evaluations += part.evaluations;
        total.converged = total.converged && part.converged;
        panel_values.push_back(part.value);
        lo = hi;
        step *= 2.0;
    }

    // Mass beyond the cutoff: for a regularly varying integrand the
    // doubling-panel contributions are asymptotically an exact geometric
    // series, so extrapolate the remainder from the last panel ratio. For
    // faster-than-polynomial decay the ratio tends to 0 and the correction
    // vanishes.
    const std::size_t k = panel_values.size();
    if (k >= 3 && panel_values[k - 2] > 0.0 && panel_values[k - 3] > 0.0) {
        const double r1 = panel_values[k - 2] / panel_values[k - 3];
        const double r2 = panel_values[k - 1] / panel_values[k - 2];
        if (r2 >= 0.995) {
            // Doubling panels contribute a non-decaying geometric series:
            // the integrand decays like 1/y or slower.
            throw ConvergenceError(
                "integrate_upper_tail: panel contributions are not "
                "decaying; tail integral appears non-integrable");
        }
        const double r = std::min(r2, 0.97);
        const double remainder = panel_values[k - 1] * r / (1.0 - r);
        const double drift = std::fabs(r2 - r1);
        total.value += remainder;
        total.abs_error += panel_values[k - 1] * drift / ((1.0 - r) * (1.0 - r)) +
                           remainder * 1e-12;
    } else {
        // Too few panels to extrapolate; bound the leftover crudely by the
        // cutoff level over a comparable span.
        total.abs_error += kTailCutoffLevel * (cut - x + unit);
    }

    const double tol =
        std::max(abs_tol, rel_tol * std::fabs(total.value));
    if (!total.converged || total.abs_error > tol) {
        throw ConvergenceError(
            "integrate_upper_tail: adaptive quadrature failed to reach the "
            "requested tolerance for the tail integral");
    }
    return total;
}

}  // namespace tailsim
