#pragma once

#include <string>
#include <vector>

namespace sppa {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  bool dashed = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  /// Same scale on both axes (phase portraits).
  bool equal_aspect = false;
};

/// A self-contained SVG line chart. Points that cannot be drawn on a log axis
/// (non-positive or non-finite) are skipped.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts);

/// A deterministic color for the i-th series.
std::string palette(std::size_t i);

}  // namespace sppa
