#pragma once

// Minimal SVG line and bar charts for the CLI reports.

#include <string>
#include <utility>
#include <vector>

namespace sepl::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
};

std::string line_chart(const Chart& chart, const std::vector<Series>& series);

/// Bars over [edges[i], edges[i+1]) with heights counts[i].
std::string bar_chart(const Chart& chart, const std::vector<double>& edges,
                      const std::vector<double>& counts);

}  // namespace sepl::svg
