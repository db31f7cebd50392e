// svg_plot.hpp: Self-contained SVG line plots

#pragma once

#include <string>
#include <vector>

namespace kmsorder {

struct PlotSeries {
    std::string label;
    std::string color;  // any SVG color
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 480;
};

// One <polyline> per series, plus axes, ticks and a legend. Non-finite points
// are dropped.
std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);
void write_line_plot(const std::string& path, const PlotSpec& spec,
                     const std::vector<PlotSeries>& series);

}  // namespace kmsorder
