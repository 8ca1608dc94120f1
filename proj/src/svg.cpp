#include "vortexlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "vortexlab/numerics.hpp"

namespace vortexlab {
namespace svg {

namespace {

const char* kColors[] = {"#1b6ca8", "#c03221", "#2e7d32", "#7b1fa2",
                         "#ef6c00", "#00838f", "#5d4037", "#37474f"};

struct Mapper {
    double lo, hi;
    bool log;
    double px0, px1;
    double to_px(double v) const {
        double t = log ? std::log10(v) : v;
        double a = log ? std::log10(lo) : lo;
        double b = log ? std::log10(hi) : hi;
        if (b == a) b = a + 1.0;
        return px0 + (t - a) / (b - a) * (px1 - px0);
    }
};

std::string fmt(double v) {
    char buf[32];
    if (v != 0.0 && (std::abs(v) < 1e-3 || std::abs(v) >= 1e4))
        std::snprintf(buf, sizeof buf, "%.1e", v);
    else
        std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::vector<double> ticks(double lo, double hi, bool log) {
    std::vector<double> out;
    if (log) {
        const int a = int(std::floor(std::log10(lo)));
        const int b = int(std::ceil(std::log10(hi)));
        for (int e = a; e <= b; ++e) out.push_back(std::pow(10.0, e));
    } else {
        const double span = hi - lo;
        const double step = std::pow(10.0, std::floor(std::log10(span / 4)));
        const double s = span / step > 8 ? 2 * step : step;
        for (double v = std::ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s)
            out.push_back(v);
    }
    return out;
}

} // namespace

void write_line_plot(const std::string& path, const std::vector<Series>& series,
                     const PlotOptions& options) {
    std::ofstream out(path);
    if (!out) throw Error("write_line_plot: cannot open " + path);

    const double width = 720, height = 480;
    const double ml = 80, mr = 160, mt = 40, mb = 60;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const Series& s : series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (options.log_x && s.x[k] <= 0) continue;
            if (options.log_y && s.y[k] <= 0) continue;
            xlo = std::min(xlo, s.x[k]);
            xhi = std::max(xhi, s.x[k]);
            ylo = std::min(ylo, s.y[k]);
            yhi = std::max(yhi, s.y[k]);
        }
    if (!(xlo < xhi)) xhi = xlo + 1;
    if (!(ylo < yhi)) yhi = ylo + (ylo == 0 ? 1 : std::abs(ylo));

    Mapper mx{xlo, xhi, options.log_x, ml, width - mr};
    Mapper my{ylo, yhi, options.log_y, height - mb, mt};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    if (!options.provenance.empty()) out << "<!-- data: " << options.provenance << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\"24\" "
        << "text-anchor=\"middle\" font-size=\"16\">" << options.title << "</text>\n";

    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << (height - mb) << "\" x2=\""
        << (width - mr) << "\" y2=\"" << (height - mb)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << (height - mb) << "\" stroke=\"black\"/>\n";

    for (double v : ticks(xlo, xhi, options.log_x)) {
        if (v < xlo * 0.999 || v > xhi * 1.001) continue;
        const double px = mx.to_px(v);
        out << "<line x1=\"" << px << "\" y1=\"" << (height - mb) << "\" x2=\"" << px
            << "\" y2=\"" << (height - mb + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << (height - mb + 20)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(v) << "</text>\n";
    }
    for (double v : ticks(ylo, yhi, options.log_y)) {
        if (v < ylo * 0.999 || v > yhi * 1.001) continue;
        const double py = my.to_px(v);
        out << "<line x1=\"" << (ml - 5) << "\" y1=\"" << py << "\" x2=\"" << ml
            << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << (ml - 8) << "\" y=\"" << (py + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(v) << "</text>\n";
    }
    out << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\"" << (height - 15)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << options.x_label
        << "</text>\n";
    out << "<text x=\"20\" y=\"" << (mt + (height - mt - mb) / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 "
        << (mt + (height - mt - mb) / 2) << ")\">" << options.y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < series[s].x.size(); ++k) {
            if (options.log_x && series[s].x[k] <= 0) continue;
            if (options.log_y && series[s].y[k] <= 0) continue;
            out << mx.to_px(series[s].x[k]) << ',' << my.to_px(series[s].y[k]) << ' ';
        }
        out << "\"/>\n";
        const double ly = mt + 18.0 * double(s);
        out << "<line x1=\"" << (width - mr + 10) << "\" y1=\"" << ly << "\" x2=\""
            << (width - mr + 30) << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << (width - mr + 35) << "\" y=\"" << (ly + 4)
            << "\" font-size=\"11\">" << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace svg
} // namespace vortexlab
