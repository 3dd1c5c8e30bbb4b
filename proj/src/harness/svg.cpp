#include "ltvnet/harness/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ltvnet::harness {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr std::array<const char*, 8> kColours = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

}  // namespace

std::string render_svg(const LinePlot& plot) {
    const auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!plot.log_y || y > 0.0);
    };
    const auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };

    Range xr, yr;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            xr.add(s.x[i]);
            yr.add(ty(s.y[i]));
        }
    }
    for (const auto& r : plot.references) {
        if (usable(0.0, r.y)) yr.add(ty(r.y));
    }
    xr.finish();
    yr.finish();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto py = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           escape(plot.title) + "</text>\n";
    out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
           "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        out += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kTop + ph + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + tick(fx) + "</text>\n";
        out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(fy) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" +
               tick(plot.log_y ? std::pow(10.0, fy) : fy) + "</text>\n";
    }
    out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + escape(plot.x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" font-size=\"12\" transform=\"rotate(-90 16 " +
           num(kTop + ph / 2) + ")\" text-anchor=\"middle\">" + escape(plot.y_label) + "</text>\n";

    for (const auto& r : plot.references) {
        if (!usable(0.0, r.y)) continue;
        const char* colour = kColours[r.series % kColours.size()];
        out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(ty(r.y))) + "\" x2=\"" +
               num(kLeft + pw) + "\" y2=\"" + num(py(ty(r.y))) + "\" stroke=\"" + colour +
               "\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
    }

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* colour = kColours[k % kColours.size()];
        out += "<polyline fill=\"none\" stroke=\"";
        out += colour;
        out += "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            if (!first) out += ' ';
            first = false;
            out += num(px(s.x[i])) + "," + num(py(ty(s.y[i])));
        }
        out += "\"/>\n";
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
        out += "<text x=\"" + num(kLeft + pw + 12) + "\" y=\"" + num(ly) + "\" font-size=\"12\" fill=\"" +
               colour + "\">" + escape(s.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace ltvnet::harness
