#pragma once

#include <functional>

#include "tailsim/input_law.hpp"

namespace tailsim {

enum class TailSource { ClosedForm, Quadrature };

// The integrated tail F_I(x) = 1 ^ int_x^inf P[log(A v B) > y] dy, the
// distribution whose subexponentiality drives every stationary-tail
// statement here.
struct IntegratedTail {
    std::function<double(double)> eval;  // nonincreasing, [0, 1]-valued
    // Largest x where eval still equals 1 (the kink of the "1 ^" clip),
    // located by bisection to 1e-9; -inf if the integral never reaches 1.
    double saturation_x = 0.0;
    TailSource source = TailSource::Quadrature;
};

// Uses the law's closed form when present, otherwise adaptive quadrature
// over log_ab_tail. Throws ConvergenceError when the tail integral fails to
// converge (declared moment exponent not actually holding numerically).
IntegratedTail integrated_tail(const InputLaw& law);

// Quadrature-backed integrated tail of an arbitrary nonincreasing tail
// function (used for cross-checking closed forms and for custom laws).
IntegratedTail integrated_tail_from(TailFn tail);

// Raw unclipped int_x^inf tail(y) dy.
double upper_tail_integral(const TailFn& tail, double x);

}  // namespace tailsim
