#pragma once

#include <string>
#include <vector>

namespace cvi::harness {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "iteration";
  std::string y_label;
  bool log_y = true;
  int width = 720;
  int height = 450;
};

/// Polyline plot. Under log_y, non-positive and non-finite values are dropped.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options);

}  // namespace cvi::harness
