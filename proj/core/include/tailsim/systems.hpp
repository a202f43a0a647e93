#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tailsim/diagnostics.hpp"
#include "tailsim/input_law.hpp"
#include "tailsim/log_real.hpp"
#include "tailsim/rng.hpp"

namespace tailsim {

enum class SystemKind { Affine, Arch1, Custom };

std::string system_kind_name(SystemKind kind);

// A random Lipschitz map psi together with the affine envelope coefficients
// its draws obey:
//   A t + B - D <= psi(t) <= A t^+ + B^+ + D
// with Lipschitz constant A. The envelope coefficients come from `law`,
// which also drives all theory predictions; `apply` evaluates the exact
// sampled map at a state.
struct LipschitzSystem {
    SystemKind kind = SystemKind::Affine;
    std::string name;
    InputLaw law;
    std::function<LogReal(const InputDraw&, const LogReal&)> apply;
    // E[log Lip(psi)] = -law.mu; stored separately because custom systems
    // may carry a Lipschitz bound strictly above the envelope slope.
    double mean_log_lip = 0.0;
};

// Exact affine recursion psi(t) = A t + B. The envelope is the map itself,
// so every theory regime the law supports applies without slack.
LipschitzSystem make_affine_system(InputLaw law);

// Squared-volatility recursion psi(t) = |a1 t + sqrt(d + a2 (t^+)^2)| with
// constant parameters. Envelope coefficients (a1 + sqrt(a2), 0, sqrt(d));
// the upper envelope holds for all t >= 0 (the chain enters [0, inf) after
// one step) and for t < 0 while a1 |t| <= 2 sqrt(d). Requires a2 >= 0,
// d > 0 and 0 < a1 + sqrt(a2) < 1.
LipschitzSystem make_arch1(double a1, double a2, double d);

struct EnvelopeReport {
    std::size_t draws = 0;
    std::size_t points = 0;
    std::size_t violations = 0;
    // Most negative relative slack seen on each side (0 when the bound held
    // everywhere with margin).
    double worst_lower_margin = 0.0;
    double worst_upper_margin = 0.0;
    // One row per grid point: value/bound carry the worst lower/upper
    // relative margins at that state.
    std::vector<DiagRow> rows;
};

// Draws n_draws maps and verifies the envelope sandwich at every grid
// state. Margins are measured relative to the magnitude of the quantities
// compared; breaches beyond 1e-9 relative count as violations.
EnvelopeReport envelope_check(const LipschitzSystem& system, RngStream& rng,
                              std::size_t n_draws,
                              const std::vector<double>& grid);

}  // namespace tailsim
