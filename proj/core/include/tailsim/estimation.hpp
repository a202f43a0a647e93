#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tailsim/input_law.hpp"
#include "tailsim/log_real.hpp"
#include "tailsim/theory.hpp"

namespace tailsim {

// Standard thresholds (log scale) for tail estimation runs. Deep enough
// that the asymptotic predictions are in their regime, shallow enough that
// Monte Carlo still sees exceedances at feasible sample counts.
std::vector<double> default_tail_grid();

// Empirical exceedance curve over a threshold grid, everything on the log
// scale: entry i estimates P[X > e^(grid[i])]. Counts come first and every
// derived column is computed from them, so curves from sharded runs can be
// merged by adding counts and rebuilding.
struct TailCurve {
    std::vector<double> grid;          // strictly increasing thresholds u
    std::size_t n_samples = 0;
    std::vector<std::size_t> counts;   // exceedances of e^u, nonincreasing
    std::vector<double> p_hat;         // counts / n_samples, exact division
    std::vector<double> ci_lo;         // Wilson 95% bounds on p_hat
    std::vector<double> ci_hi;
    // Theory columns are empty until one of the attach_* calls fills them.
    // theory is NaN where the regime provides only a sandwich.
    std::vector<double> theory;
    std::vector<double> theory_lo;
    std::vector<double> theory_hi;
    std::string regime;
};

// Rebuilds a curve from raw exceedance counts (the merge path for
// multi-worker runs: sum per-threshold counts, then call this).
TailCurve tail_curve_from_counts(std::vector<double> grid,
                                 std::size_t n_samples,
                                 std::vector<std::size_t> counts);

// Counts samples with positive sign and log magnitude above each threshold.
// Negative and zero samples never count as exceedances of e^u.
TailCurve empirical_tail(const std::vector<LogReal>& samples,
                         std::vector<double> grid);

// Same curve for values already on the log scale (e.g. the running maximum
// of a log-space walk): exceedance means value > u directly.
TailCurve empirical_log_tail(const std::vector<double>& log_values,
                             std::vector<double> grid);

// Picks the sharpest stationary-tail regime the law's declared structure
// supports: the exact-constant regime when B - D > 0 a.s. and the
// tail-equivalence conditions hold, otherwise the two-sided sandwich.
Regime default_regime(const InputLaw& law);

// Fill the theory columns with stationary-tail predictions at each grid
// threshold.
void attach_stationary_theory(TailCurve& curve, const InputLaw& law,
                              const Regime& regime);

// Fill the theory columns with finite-horizon predictions for P[R_n > e^u];
// w and r_pos as in theory_tail_finite.
void attach_finite_horizon_theory(TailCurve& curve, const InputLaw& law,
                                  int n, double w, const Regime& regime,
                                  const std::vector<double>& r_pos = {});

// Fill the theory columns with the sup-walk prediction for P[M > u].
void attach_sup_walk_theory(TailCurve& curve, const InputLaw& law);

// Classifies how the empirical/theory ratio behaves across the grid.
//   "stable"       - the last three ratio intervals pairwise overlap;
//   "diverging"    - ratios grow monotonically and at least double overall;
//   "inconclusive" - anything else (including too few usable thresholds).
// Requires theory columns; normalizes by the point value where the regime
// has one and by the sandwich midpoint otherwise.
std::string ratio_trend(const TailCurve& curve);

struct FactorEstimate {
    double factor = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Ratio of two exceedance probabilities at a shared threshold, with the
// conservative interval [lo_num/hi_den, hi_num/lo_den]. Requires u to be a
// grid point of both curves and the denominator to have exceedances.
FactorEstimate tail_factor(const TailCurve& numerator,
                           const TailCurve& denominator, double u);

}  // namespace tailsim
