#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>

namespace sepl::svg {

namespace {

constexpr double kWidth = 480, kHeight = 360;
constexpr double kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

struct Frame {
    Chart c;
    double sx(double x) const { return kLeft + (x - c.x_min) / (c.x_max - c.x_min) * (kWidth - kLeft - kRight); }
    double sy(double y) const { return kHeight - kBottom - (y - c.y_min) / (c.y_max - c.y_min) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& o, const Frame& f) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << escape(f.c.title)
      << "</text>\n";
    const double x0 = f.sx(f.c.x_min), x1 = f.sx(f.c.x_max), y0 = f.sy(f.c.y_min), y1 = f.sy(f.c.y_max);
    o << "<polyline fill=\"none\" stroke=\"black\" points=\"" << x0 << ',' << y1 << ' ' << x0 << ',' << y0 << ' '
      << x1 << ',' << y0 << "\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = f.c.x_min + (f.c.x_max - f.c.x_min) * i / 5.0;
        const double yv = f.c.y_min + (f.c.y_max - f.c.y_min) * i / 5.0;
        o << "<line x1=\"" << f.sx(xv) << "\" y1=\"" << y0 << "\" x2=\"" << f.sx(xv) << "\" y2=\"" << y0 + 4
          << "\" stroke=\"black\"/>";
        o << "<text x=\"" << f.sx(xv) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
        o << "<line x1=\"" << x0 - 4 << "\" y1=\"" << f.sy(yv) << "\" x2=\"" << x0 << "\" y2=\"" << f.sy(yv)
          << "\" stroke=\"black\"/>";
        o << "<text x=\"" << x0 - 6 << "\" y=\"" << f.sy(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
    }
    o << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(f.c.x_label) << "</text>\n";
    o << "<text x=\"14\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << (y0 + y1) / 2 << ")\">" << escape(f.c.y_label) << "</text>\n";
}

}  // namespace

std::string line_chart(const Chart& chart, const std::vector<Series>& series) {
    std::ostringstream o;
    const Frame f{chart};
    header(o, f);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kColors[k % std::size(kColors)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[k].points) o << f.sx(x) << ',' << f.sy(y) << ' ';
        o << "\"/>\n";
        const double ly = kTop + 14.0 * (k + 1);
        o << "<text x=\"" << kWidth - kRight - 4 << "\" y=\"" << ly << "\" text-anchor=\"end\" fill=\"" << color
          << "\">" << escape(series[k].label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string bar_chart(const Chart& chart, const std::vector<double>& edges, const std::vector<double>& counts) {
    std::ostringstream o;
    const Frame f{chart};
    header(o, f);
    for (std::size_t i = 0; i < counts.size() && i + 1 < edges.size(); ++i) {
        const double x = f.sx(edges[i]), w = f.sx(edges[i + 1]) - x, top = f.sy(counts[i]);
        o << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << std::max(0.0, w - 1) << "\" height=\""
          << f.sy(chart.y_min) - top << "\" fill=\"" << kColors[0] << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace sepl::svg
