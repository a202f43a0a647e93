#pragma once

#include <string>
#include <vector>

namespace tailsim {

// Minimal native SVG plotting: enough for a tail curve with confidence
// whiskers over a theory band, nothing more. Output bytes are deterministic
// functions of the inputs (fixed precision, no timestamps), so plots fall
// under the same reproducibility contract as the CSV tables.

struct PlotSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    // Optional per-point whiskers; empty means none, otherwise sized as ys.
    std::vector<double> y_lo;
    std::vector<double> y_hi;
    std::string color = "#1f6feb";
    bool draw_line = true;
    bool draw_markers = true;
};

struct PlotBand {
    std::string label;
    std::vector<double> xs;
    std::vector<double> lo;
    std::vector<double> hi;
    std::string color = "#f0a840";
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    // Log base-10 vertical axis; points with y <= 0 are dropped (a zero
    // exceedance count has no finite position on a log axis).
    bool log_y = true;
    int width = 720;
    int height = 480;
};

std::string render_plot(const std::vector<PlotSeries>& series,
                        const std::vector<PlotBand>& bands,
                        const PlotOptions& options);

}  // namespace tailsim
