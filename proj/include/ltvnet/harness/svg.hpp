#pragma once

#include <string>
#include <vector>

namespace ltvnet::harness {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Horizontal reference line, drawn dashed in the colour of series `series`.
struct ReferenceLine {
    double y = 0.0;
    std::size_t series = 0;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;            // one <polyline> each
    std::vector<ReferenceLine> references;  // one dashed <line> each
    bool log_y = false;
};

// Standalone SVG document. Non-finite points (and non-positive ones on a
// log axis) are dropped from their polyline.
std::string render_svg(const LinePlot& plot);

}  // namespace ltvnet::harness
