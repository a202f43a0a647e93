#pragma once

#include <functional>

namespace tailsim {

using Integrand = std::function<double(double)>;

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;   // estimated, not guaranteed
    long evaluations = 0;
    bool converged = false;
};

// Adaptive Gauss-Kronrod (7-15) bisection on the finite interval [a, b].
// Stops when the summed error estimate drops below
// max(abs_tol, rel_tol * |value|) or the subdivision budget runs out.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           double rel_tol = 1e-10, double abs_tol = 0.0,
                           int max_subdivisions = 2000);

// int_x^inf f for a nonnegative, eventually-decaying integrand. The upper
// cutoff is the first point (scanned geometrically away from x) where f
// drops below kTailCutoffLevel; the range up to it is covered by log-spaced
// panels, each integrated adaptively, and the mass beyond the cutoff is
// recovered by geometric extrapolation of the panel series. Throws
// ConvergenceError when no cutoff exists within the scan range
// (non-integrable or too slowly decaying tail) or the error estimate misses
// max(abs_tol, rel_tol * |value|); the absolute floor keeps identically
// zero tails (finite-support laws) from failing a meaningless relative
// test.
QuadratureResult integrate_upper_tail(const Integrand& f, double x,
                                      double rel_tol = 1e-10,
                                      double abs_tol = 1e-13);

inline constexpr double kTailCutoffLevel = 1e-16;

}  // namespace tailsim
