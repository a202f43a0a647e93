#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tailsim/input_law.hpp"
#include "tailsim/log_real.hpp"
#include "tailsim/rng.hpp"
#include "tailsim/systems.hpp"

namespace tailsim {

// Right-to-left fold of the sampled maps over the draws: returns
// psi_1(psi_2(... psi_n(r0))). Throws OverflowError if any intermediate
// state magnitude passes the overflow guard.
LogReal backward_compose(const LipschitzSystem& system,
                         const std::vector<InputDraw>& draws,
                         const LogReal& r0);

// Left-to-right iteration psi_n(... psi_1(r0)) drawing fresh maps; `visit`
// (when set) observes each post-step state, index 1..steps.
LogReal forward_iterate(
    const LipschitzSystem& system, RngStream& rng, const LogReal& r0,
    std::size_t steps,
    const std::function<void(std::size_t, const LogReal&)>& visit = nullptr);

struct PerpetuityOptions {
    // Stop once the bound on the dropped backward tail sits this many log
    // units below the running sample scale.
    double rel_tol_log = 50.0;
    std::size_t max_terms = 1'000'000;
};

struct StationarySample {
    // Exact backward value psi_1(...psi_n(0)) of the sampled maps.
    LogReal value;
    // Pathwise affine envelope series on the same draws:
    //   lower = sum prefix_k (B_k - D_k), upper = sum prefix_k (B_k^+ + D_k)
    // with prefix_k = A_1...A_{k-1}; lower <= value <= upper always.
    LogReal lower;
    LogReal upper;
    std::size_t terms_used = 0;
    // Log of the heuristic a.s. bound on the dropped tail at the stop: the
    // running prefix times the largest envelope term seen times a geometric
    // factor from the running contraction estimate.
    double residual_log_bound = 0.0;
    bool converged = false;
};

// Draws one stationary sample by the backward series with an adaptive
// number of terms. Throws ConvergenceError when max_terms is reached before
// the residual bound clears the requested resolution.
class PerpetuitySampler {
  public:
    explicit PerpetuitySampler(const LipschitzSystem& system,
                               PerpetuityOptions opts = {});
    StationarySample sample(RngStream& rng);

  private:
    const LipschitzSystem* system_;
    PerpetuityOptions opts_;
    std::vector<InputDraw> draws_;  // reused across samples
};

StationarySample sample_perpetuity(const LipschitzSystem& system,
                                   RngStream& rng,
                                   const PerpetuityOptions& opts = {});

struct SupWalkOptions {
    // Stop once the walk has fallen this far below the running record; the
    // chance the true supremum still beats the record is bounded by the
    // stationary sup-walk tail at record + guard.
    double guard_log = 60.0;
    std::size_t max_steps = 50'000'000;
};

struct SupWalkSample {
    double m = 0.0;              // sup_n (S_n + log Bbar_{n+1}), log scale
    std::size_t steps = 0;       // draws consumed before stopping
    std::size_t record_index = 0;  // n achieving the supremum
};

// Supremum of the perturbed random walk S_n = sum_{i<=n} log A_i with
// perturbation log Bbar, Bbar = (B^+ + D) v 1. Plain double arithmetic:
// the walk lives on the log scale already.
SupWalkSample sample_sup_walk(const InputLaw& law, RngStream& rng,
                              const SupWalkOptions& opts = {});

struct Enumeration {
    std::vector<double> values;  // ascending
    std::vector<double> probs;   // aligned with values, sums to 1
    std::size_t steps = 0;
};

// Exact distribution of the n-step state for finite-support laws, merging
// numerically equal states. Throws ConfigError when the law carries no
// atoms and OverflowError when the state count passes max_states.
Enumeration enumerate_finite(const LipschitzSystem& system, double r0,
                             std::size_t steps,
                             std::size_t max_states = (1u << 20));

}  // namespace tailsim
