#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tailsim/diagnostics.hpp"
#include "tailsim/estimation.hpp"
#include "tailsim/log_real.hpp"
#include "tailsim/theory.hpp"

namespace tailsim {

// Canonical number rendering for every CSV cell: shortest-precision %.17g,
// which round-trips doubles exactly and never depends on locale or stream
// state. Non-finite values render as "nan", "inf", "-inf". Byte-stable
// output is an interface guarantee (reruns under equal seeds must compare
// equal as files), so all writers funnel through here.
std::string format_double(double v);

// One (step, sign, log_mag) row per visited state of a trajectory.
struct TrajectoryPoint {
    std::size_t step = 0;
    int sign = 0;
    double log_mag = 0.0;
};

// Tail-curve table: header comment carrying the scenario name and seed,
// then columns u, n_samples, count, p_hat, ci_lo, ci_hi, theory,
// theory_lo, theory_hi, ratio (ratio = p_hat / theory).
std::string tail_curve_csv(const TailCurve& curve, const std::string& scenario,
                           std::uint64_t seed);

// Prediction-only table: columns u, prediction, lower, upper, regime. The
// regime label is caller-supplied (sup-walk predictions are not one of the
// stationary regimes).
std::string prediction_csv(const std::vector<double>& grid,
                           const std::vector<TailPrediction>& preds,
                           const std::string& regime_label,
                           const std::string& scenario, std::uint64_t seed);

// Diagnostic table: columns x, y, value, bound, verdict.
std::string diag_rows_csv(const std::vector<DiagRow>& rows,
                          const std::string& scenario, std::uint64_t seed);

// Trajectory dump: columns step, sign, log_mag.
std::string trajectory_csv(const std::vector<TrajectoryPoint>& points,
                           const std::string& scenario, std::uint64_t seed);

// Exact-distribution dump: columns value, probability.
std::string enumeration_csv(const std::vector<double>& values,
                            const std::vector<double>& probs,
                            const std::string& scenario);

// Writes content to path atomically: a sibling temp file is written and
// fsync'd, then renamed over the target, so readers never observe a partial
// file. Throws IoError on any filesystem failure.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace tailsim
