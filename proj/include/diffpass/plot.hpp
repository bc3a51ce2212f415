#pragma once

// Minimal deterministic SVG line plots for the demo outputs. Fixed canvas,
// fixed palette, fixed tick layout; numbers are printed with %.6g so the same
// data always produces byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace diffpass {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

namespace detail {

inline std::string fmt6(double v) {
    if (!std::isfinite(v)) v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// A "nice" tick step of the form {1,2,5} * 10^k covering span/target ticks.
inline double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step;
    if (norm <= 1.0) step = 1.0;
    else if (norm <= 2.0) step = 2.0;
    else if (norm <= 5.0) step = 5.0;
    else step = 10.0;
    return step * mag;
}

}  // namespace detail

inline void write_svg_plot(std::ostream& os, const std::vector<PlotSeries>& series,
                           const std::string& title, const std::string& xlabel,
                           const std::string& ylabel) {
    using detail::fmt6;
    constexpr double width = 800.0, height = 500.0;
    constexpr double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
    const double pw = width - ml - mr, ph = height - mt - mb;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    constexpr std::size_t n_colors = sizeof(palette) / sizeof(palette[0]);

    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    bool have = false;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!have) {
                x_lo = x_hi = s.x[i];
                y_lo = y_hi = s.y[i];
                have = true;
            } else {
                x_lo = std::min(x_lo, s.x[i]);
                x_hi = std::max(x_hi, s.x[i]);
                y_lo = std::min(y_lo, s.y[i]);
                y_hi = std::max(y_hi, s.y[i]);
            }
        }
    if (x_hi - x_lo < 1e-12) { x_lo -= 0.5; x_hi += 0.5; }
    if (y_hi - y_lo < 1e-12) { y_lo -= 0.5; y_hi += 0.5; }
    const double y_pad = 0.05 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
          "viewBox=\"0 0 800 500\">\n";
    os << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt6(ml + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // Axes frame.
    os << "<rect x=\"" << fmt6(ml) << "\" y=\"" << fmt6(mt) << "\" width=\"" << fmt6(pw)
       << "\" height=\"" << fmt6(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Ticks and grid lines.
    const double xs = detail::nice_step(x_hi - x_lo, 8);
    for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9 * xs; t += xs) {
        const double gx = px(t);
        os << "<line x1=\"" << fmt6(gx) << "\" y1=\"" << fmt6(mt) << "\" x2=\"" << fmt6(gx)
           << "\" y2=\"" << fmt6(mt + ph) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << fmt6(gx) << "\" y=\"" << fmt6(mt + ph + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           << fmt6(std::abs(t) < 1e-9 * xs ? 0.0 : t) << "</text>\n";
    }
    const double ys = detail::nice_step(y_hi - y_lo, 6);
    for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9 * ys; t += ys) {
        const double gy = py(t);
        os << "<line x1=\"" << fmt6(ml) << "\" y1=\"" << fmt6(gy) << "\" x2=\"" << fmt6(ml + pw)
           << "\" y2=\"" << fmt6(gy) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << fmt6(ml - 6) << "\" y=\"" << fmt6(gy + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
           << fmt6(std::abs(t) < 1e-9 * ys ? 0.0 : t) << "</text>\n";
    }

    // Axis labels.
    os << "<text x=\"" << fmt6(ml + pw / 2) << "\" y=\"" << fmt6(height - 10)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << fmt6(mt + ph / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
          "transform=\"rotate(-90 16 " << fmt6(mt + ph / 2) << ")\">" << ylabel << "</text>\n";

    // Series.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        os << "<polyline fill=\"none\" stroke=\"" << palette[si % n_colors]
           << "\" stroke-width=\"1.5\" points=\"";
        const std::size_t np = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < np; ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (i) os << ' ';
            os << fmt6(px(s.x[i])) << ',' << fmt6(py(s.y[i]));
        }
        os << "\"/>\n";
    }

    // Legend, top-right inside the frame.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double ly = mt + 16 + 18.0 * static_cast<double>(si);
        os << "<line x1=\"" << fmt6(ml + pw - 150) << "\" y1=\"" << fmt6(ly) << "\" x2=\""
           << fmt6(ml + pw - 126) << "\" y2=\"" << fmt6(ly) << "\" stroke=\""
           << palette[si % n_colors] << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << fmt6(ml + pw - 120) << "\" y=\"" << fmt6(ly + 4)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[si].label
           << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace diffpass
