#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailsim/input_law.hpp"
#include "tailsim/integrated_tail.hpp"

namespace tailsim {

// Which limit statement a prediction instantiates:
//   GeneralBounds - two-sided sandwich, constant known only up to P[R > 0];
//   PositiveBD    - B - D > 0 a.s., exact constant 1/mu;
//   BDominates    - P[A > x] = o(P[B > x]), exact constant 1/mu over the
//                   positive-part tail of B;
//   ADominates    - P[B > x] = o(P[A > x]), constant P[R > 0]/mu.
enum class RegimeKind { GeneralBounds, PositiveBD, BDominates, ADominates };

std::string regime_name(RegimeKind kind);

struct Regime {
    RegimeKind kind = RegimeKind::GeneralBounds;
    // Monte-Carlo estimate of P[R > 0]; consumed by ADominates (as the
    // prediction constant) and GeneralBounds (as the lower-bound constant).
    std::optional<double> aux;
    // Optional confidence interval on aux, carried through to the
    // prediction interval.
    std::optional<std::pair<double, double>> aux_interval;
};

struct TailPrediction {
    std::optional<double> point;  // absent for GeneralBounds
    double lower = 0.0;
    double upper = 0.0;
    RegimeKind regime = RegimeKind::GeneralBounds;
};

// Prediction for the stationary tail P[R > e^u].
//   GeneralBounds: (aux * F_I(u)/mu, F_I(u)/mu), no point value;
//   PositiveBD:    F_I(u)/mu;
//   BDominates:    (1/mu) int_u^inf P[log^+ B > y] dy;
//   ADominates:    (aux/mu) int_u^inf P[log A > y] dy.
// Preconditions: u past the saturation point of the regime's integrated
// tail, and the law's flags must support the requested exact regime.
TailPrediction theory_tail_stationary(const InputLaw& law,
                                      const Regime& regime, double u);

// Prediction for the finite-horizon tail P[R_n > e^u] with R_0-weight w,
// w = P[R_0 > e^u] passthrough mass (point initial conditions give w = 1
// above their value, 0 below).
//   PositiveBD:    (w + n) P[A v B > e^u];
//   GeneralBounds: lower (w + sum_{k<n} r_pos[k]) P[A v B > e^u],
//                  upper (w + n) P[A v B > e^u];
//   BDominates:    (w + n) P[B > e^u];
//   ADominates:    (w + sum_{k<n} r_pos[k]) P[A > e^u].
// r_pos[k] are estimates of P[R_k > 0]; required (length >= n, values in
// [0, 1]) for GeneralBounds and ADominates.
TailPrediction theory_tail_finite(const InputLaw& law, int n, double w,
                                  const Regime& regime, double u,
                                  const std::vector<double>& r_pos = {});

// Prediction for the all-time maximum of the perturbed log walk:
// P[M > u] -> (1/mu) int_u^inf P[log(A v Bbar) > y] dy with
// Bbar = (B^+ + D) v 1.
double theory_sup_walk(const InputLaw& law, double u);

}  // namespace tailsim
