#include "tailsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
};

// Round a raw step up to the nearest 1/2/5 x 10^k, the usual tick spacing.
double nice_step(double span, int target_ticks) {
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double step = 10.0;
    if (frac <= 1.0) step = 1.0;
    else if (frac <= 2.0) step = 2.0;
    else if (frac <= 5.0) step = 5.0;
    return step * mag;
}

std::string tick_label(double v) {
    char buf[32];
    const double a = std::fabs(v);
    if (v != 0.0 && (a >= 1e5 || a < 1e-3)) {
        std::snprintf(buf, sizeof(buf), "%.0e", v);
    } else {
        std::snprintf(buf, sizeof(buf), "%g", v);
    }
    return buf;
}

}  // namespace

std::string render_plot(const std::vector<PlotSeries>& series,
                        const std::vector<PlotBand>& bands,
                        const PlotOptions& options) {
    const double w = options.width;
    const double h = options.height;
    const double ml = 72.0, mr = 24.0, mt = 40.0, mb = 56.0;
    const double pw = w - ml - mr;
    const double ph = h - mt - mb;

    const auto yv = [&](double y) {
        return options.log_y ? (y > 0.0 ? std::log10(y)
                                        : std::numeric_limits<double>::quiet_NaN())
                             : y;
    };

    Range xr, yr;
    for (const PlotSeries& s : series) {
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            const double t = yv(s.ys[i]);
            if (!std::isfinite(t)) continue;
            xr.include(s.xs[i]);
            yr.include(t);
            if (!s.y_lo.empty()) yr.include(yv(s.y_lo[i]));
            if (!s.y_hi.empty()) yr.include(yv(s.y_hi[i]));
        }
    }
    for (const PlotBand& b : bands) {
        for (std::size_t i = 0; i < b.xs.size(); ++i) {
            const double lo = yv(b.lo[i]);
            const double hi = yv(b.hi[i]);
            if (std::isfinite(hi)) {
                xr.include(b.xs[i]);
                yr.include(hi);
            }
            if (std::isfinite(lo)) yr.include(lo);
        }
    }
    if (!xr.valid() || !yr.valid()) {
        throw DomainError("render_plot: no finite data points to draw");
    }
    if (xr.lo == xr.hi) {
        xr.lo -= 0.5;
        xr.hi += 0.5;
    }
    if (yr.lo == yr.hi) {
        yr.lo -= 0.5;
        yr.hi += 0.5;
    }
    // Breathing room so markers are not clipped at the frame.
    const double xpad = 0.04 * (xr.hi - xr.lo);
    const double ypad = 0.06 * (yr.hi - yr.lo);
    xr.lo -= xpad;
    xr.hi += xpad;
    yr.lo -= ypad;
    yr.hi += ypad;

    const auto X = [&](double x) {
        return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw;
    };
    const auto Y = [&](double y) {
        const double t = yv(y);
        return mt + (yr.hi - t) / (yr.hi - yr.lo) * ph;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) +
           "\" height=\"" + px(h) + "\" viewBox=\"0 0 " + px(w) + " " + px(h) +
           "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Gridlines and tick labels.
    const std::string axis_text =
        " font-family=\"monospace\" font-size=\"11\" fill=\"#444\"";
    const double xstep = nice_step(xr.hi - xr.lo, 6);
    for (double t = std::ceil(xr.lo / xstep) * xstep; t <= xr.hi + 1e-12;
         t += xstep) {
        const double gx = X(t);
        svg += "<line x1=\"" + px(gx) + "\" y1=\"" + px(mt) + "\" x2=\"" +
               px(gx) + "\" y2=\"" + px(mt + ph) +
               "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + px(gx) + "\" y=\"" + px(mt + ph + 16) +
               "\" text-anchor=\"middle\"" + axis_text + ">" + tick_label(t) +
               "</text>\n";
    }
    if (options.log_y) {
        for (double d = std::ceil(yr.lo); d <= std::floor(yr.hi) + 1e-12;
             d += 1.0) {
            const double gy = mt + (yr.hi - d) / (yr.hi - yr.lo) * ph;
            svg += "<line x1=\"" + px(ml) + "\" y1=\"" + px(gy) + "\" x2=\"" +
                   px(ml + pw) + "\" y2=\"" + px(gy) +
                   "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
            char lab[24];
            std::snprintf(lab, sizeof(lab), "1e%d", static_cast<int>(d));
            svg += "<text x=\"" + px(ml - 6) + "\" y=\"" + px(gy + 4) +
                   "\" text-anchor=\"end\"" + axis_text + ">" + lab +
                   "</text>\n";
        }
    } else {
        const double ystep = nice_step(yr.hi - yr.lo, 6);
        for (double t = std::ceil(yr.lo / ystep) * ystep; t <= yr.hi + 1e-12;
             t += ystep) {
            const double gy = mt + (yr.hi - t) / (yr.hi - yr.lo) * ph;
            svg += "<line x1=\"" + px(ml) + "\" y1=\"" + px(gy) + "\" x2=\"" +
                   px(ml + pw) + "\" y2=\"" + px(gy) +
                   "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
            svg += "<text x=\"" + px(ml - 6) + "\" y=\"" + px(gy + 4) +
                   "\" text-anchor=\"end\"" + axis_text + ">" + tick_label(t) +
                   "</text>\n";
        }
    }

    // Bands underneath the series.
    for (const PlotBand& b : bands) {
        std::string pts;
        for (std::size_t i = 0; i < b.xs.size(); ++i) {
            if (!std::isfinite(yv(b.hi[i]))) continue;
            pts += px(X(b.xs[i])) + "," + px(Y(b.hi[i])) + " ";
        }
        for (std::size_t i = b.xs.size(); i-- > 0;) {
            double lo = b.lo[i];
            if (!std::isfinite(yv(lo))) lo = std::pow(10.0, yr.lo);
            if (!std::isfinite(yv(b.hi[i]))) continue;
            pts += px(X(b.xs[i])) + "," + px(Y(lo)) + " ";
        }
        if (!pts.empty()) {
            svg += "<polygon points=\"" + pts + "\" fill=\"" + b.color +
                   "\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
        }
    }

    // Series: whiskers, then line, then markers.
    for (const PlotSeries& s : series) {
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (s.y_lo.empty() || !std::isfinite(yv(s.ys[i]))) continue;
            const double lo = yv(s.y_lo[i]);
            const double hi = yv(s.y_hi[i]);
            if (!std::isfinite(hi)) continue;
            const double top = Y(s.y_hi[i]);
            const double bot = std::isfinite(lo) ? Y(s.y_lo[i]) : mt + ph;
            svg += "<line x1=\"" + px(X(s.xs[i])) + "\" y1=\"" + px(top) +
                   "\" x2=\"" + px(X(s.xs[i])) + "\" y2=\"" + px(bot) +
                   "\" stroke=\"" + s.color + "\" stroke-width=\"1\"/>\n";
        }
        if (s.draw_line) {
            std::string pts;
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(yv(s.ys[i]))) continue;
                pts += px(X(s.xs[i])) + "," + px(Y(s.ys[i])) + " ";
            }
            if (!pts.empty()) {
                svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
                       s.color + "\" stroke-width=\"1.5\"/>\n";
            }
        }
        if (s.draw_markers) {
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(yv(s.ys[i]))) continue;
                svg += "<circle cx=\"" + px(X(s.xs[i])) + "\" cy=\"" +
                       px(Y(s.ys[i])) + "\" r=\"3\" fill=\"" + s.color +
                       "\"/>\n";
            }
        }
    }

    // Frame, labels, legend.
    svg += "<rect x=\"" + px(ml) + "\" y=\"" + px(mt) + "\" width=\"" + px(pw) +
           "\" height=\"" + px(ph) +
           "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    const std::string label_text =
        " font-family=\"monospace\" font-size=\"13\" fill=\"#111\"";
    svg += "<text x=\"" + px(ml + pw / 2) + "\" y=\"" + px(24.0) +
           "\" text-anchor=\"middle\"" + label_text + ">" +
           escape_text(options.title) + "</text>\n";
    svg += "<text x=\"" + px(ml + pw / 2) + "\" y=\"" + px(h - 14) +
           "\" text-anchor=\"middle\"" + label_text + ">" +
           escape_text(options.x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + px(mt + ph / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           px(mt + ph / 2) + ")\"" + label_text + ">" +
           escape_text(options.y_label) + "</text>\n";

    double ly = mt + 14.0;
    const double lx = ml + pw - 160.0;
    for (const PlotSeries& s : series) {
        if (s.label.empty()) continue;
        svg += "<rect x=\"" + px(lx) + "\" y=\"" + px(ly - 9) +
               "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
        svg += "<text x=\"" + px(lx + 16) + "\" y=\"" + px(ly) + "\"" +
               axis_text + ">" + escape_text(s.label) + "</text>\n";
        ly += 16.0;
    }
    for (const PlotBand& b : bands) {
        if (b.label.empty()) continue;
        svg += "<rect x=\"" + px(lx) + "\" y=\"" + px(ly - 9) +
               "\" width=\"10\" height=\"10\" fill=\"" + b.color +
               "\" fill-opacity=\"0.25\"/>\n";
        svg += "<text x=\"" + px(lx + 16) + "\" y=\"" + px(ly) + "\"" +
               axis_text + ">" + escape_text(b.label) + "</text>\n";
        ly += 16.0;
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace tailsim
