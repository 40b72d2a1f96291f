#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace kflow {

// Minimal static SVG line plots (axes, ticks, legend, optional log scales).
// Plots are derived artifacts; CSV files remain the data of record.

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct SvgPlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 460;
};

void write_svg_plot(std::ostream& out, const std::vector<SvgSeries>& series,
                    const SvgPlotOptions& options);

}  // namespace kflow
