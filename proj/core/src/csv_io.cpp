#include "tailsim/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "tailsim/errors.hpp"

namespace tailsim {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string preamble(const std::string& scenario, std::uint64_t seed) {
    return "# scenario=" + scenario + " seed=" + std::to_string(seed) + "\n";
}

}  // namespace

std::string tail_curve_csv(const TailCurve& curve, const std::string& scenario,
                           std::uint64_t seed) {
    std::string out = preamble(scenario, seed);
    out += "u,n_samples,count,p_hat,ci_lo,ci_hi,theory,theory_lo,theory_hi,"
           "ratio\n";
    const bool with_theory = curve.theory.size() == curve.grid.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const double theory = with_theory ? curve.theory[i] : nan;
        const double lo = with_theory ? curve.theory_lo[i] : nan;
        const double hi = with_theory ? curve.theory_hi[i] : nan;
        out += format_double(curve.grid[i]);
        out += ',' + std::to_string(curve.n_samples);
        out += ',' + std::to_string(curve.counts[i]);
        out += ',' + format_double(curve.p_hat[i]);
        out += ',' + format_double(curve.ci_lo[i]);
        out += ',' + format_double(curve.ci_hi[i]);
        out += ',' + format_double(theory);
        out += ',' + format_double(lo);
        out += ',' + format_double(hi);
        out += ',' + format_double(curve.p_hat[i] / theory);
        out += '\n';
    }
    return out;
}

std::string prediction_csv(const std::vector<double>& grid,
                           const std::vector<TailPrediction>& preds,
                           const std::string& regime_label,
                           const std::string& scenario, std::uint64_t seed) {
    if (grid.size() != preds.size()) {
        throw DomainError("prediction_csv: grid and prediction sizes differ");
    }
    std::string out = preamble(scenario, seed);
    out += "u,prediction,lower,upper,regime\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out += format_double(grid[i]);
        out += ',' + format_double(preds[i].point ? *preds[i].point : nan);
        out += ',' + format_double(preds[i].lower);
        out += ',' + format_double(preds[i].upper);
        out += ',' + regime_label;
        out += '\n';
    }
    return out;
}

std::string diag_rows_csv(const std::vector<DiagRow>& rows,
                          const std::string& scenario, std::uint64_t seed) {
    std::string out = preamble(scenario, seed);
    out += "x,y,value,bound,verdict\n";
    for (const DiagRow& r : rows) {
        out += format_double(r.x);
        out += ',' + format_double(r.y);
        out += ',' + format_double(r.value);
        out += ',' + format_double(r.bound);
        out += ',' + r.verdict;
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& points,
                           const std::string& scenario, std::uint64_t seed) {
    std::string out = preamble(scenario, seed);
    out += "step,sign,log_mag\n";
    for (const TrajectoryPoint& p : points) {
        out += std::to_string(p.step);
        out += ',' + std::to_string(p.sign);
        out += ',' + format_double(p.log_mag);
        out += '\n';
    }
    return out;
}

std::string enumeration_csv(const std::vector<double>& values,
                            const std::vector<double>& probs,
                            const std::string& scenario) {
    if (values.size() != probs.size()) {
        throw DomainError("enumeration_csv: values and probs sizes differ");
    }
    std::string out = "# scenario=" + scenario + "\n";
    out += "value,probability\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += format_double(values[i]);
        out += ',' + format_double(probs[i]);
        out += '\n';
    }
    return out;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    const fs::path dir = path.parent_path();
    if (!dir.empty()) {
        fs::create_directories(dir, ec);
        if (ec) {
            throw IoError("cannot create output directory " + dir.string() +
                          ": " + ec.message());
        }
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        f.write(content.data(),
                static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            throw IoError("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename " + tmp.string() + " over " +
                      path.string());
    }
}

}  // namespace tailsim
