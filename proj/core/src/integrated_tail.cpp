#include "tailsim/integrated_tail.hpp"

#include <cmath>
#include <limits>

#include "tailsim/errors.hpp"
#include "tailsim/quadrature.hpp"

namespace tailsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Locates the kink sup{x : eval(x) = 1} by doubling scans plus bisection.
double find_saturation(const std::function<double(double)>& eval) {
    // Find some b with eval(b) < 1.
    double b = 0.0;
    if (eval(b) >= 1.0) {
        double step = 1.0;
        while (eval(b + step) >= 1.0) {
            step *= 2.0;
            if (step > 1e18) return kInf;  // never drops below 1
        }
        b += step;
    }
    // Find some a <= b with eval(a) >= 1.
    double a = std::min(b, 0.0);
    double step = 1.0;
    while (eval(a) < 1.0) {
        a -= step;
        step *= 2.0;
        if (step > 1e18) return -kInf;  // never saturates
    }
    while (b - a > 1e-9) {
        const double mid = 0.5 * (a + b);
        if (eval(mid) >= 1.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return a;
}

}  // namespace

double upper_tail_integral(const TailFn& tail, double x) {
    return integrate_upper_tail(tail, x).value;
}

IntegratedTail integrated_tail_from(TailFn tail) {
    IntegratedTail it;
    it.source = TailSource::Quadrature;
    it.eval = [tail = std::move(tail)](double x) {
        return std::min(1.0, integrate_upper_tail(tail, x).value);
    };
    it.saturation_x = find_saturation(it.eval);
    return it;
}

IntegratedTail integrated_tail(const InputLaw& law) {
    if (law.closed_form_fi.has_value()) {
        IntegratedTail it;
        it.source = TailSource::ClosedForm;
        it.eval = [fi = *law.closed_form_fi](double x) {
            return std::min(1.0, fi(x));
        };
        it.saturation_x = find_saturation(it.eval);
        return it;
    }
    return integrated_tail_from(law.log_ab_tail);
}

}  // namespace tailsim
