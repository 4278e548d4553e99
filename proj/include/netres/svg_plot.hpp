#pragma once

#include <string>
#include <vector>

namespace netres {

struct PlotSeries {
  std::string label;
  std::vector<double> y;  // plotted against x = 1..size()
  std::string color = "#1f77b4";
};

// Minimal standalone SVG line chart: axes, tick labels, legend, one polyline
// per series, optional dashed vertical markers (e.g. regime changes).
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series,
                     const std::vector<double>& vlines = {});

}  // namespace netres
