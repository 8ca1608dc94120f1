#pragma once

#include <string>
#include <vector>

namespace vortexlab {
namespace svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
};

struct PlotOptions {
    std::string title;
    std::string x_label, y_label;
    bool log_x = false;
    bool log_y = false;
    std::string provenance; // embedded as a comment for traceability
};

/// Minimal line plot with axes, ticks and a legend.
void write_line_plot(const std::string& path, const std::vector<Series>& series,
                     const PlotOptions& options);

} // namespace svg
} // namespace vortexlab
