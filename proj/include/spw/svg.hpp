#pragma once

#include <string>
#include <vector>

#include "spw/stats.hpp"

namespace spw::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Bar chart of one histogram, or of several overlaid with transparency.
std::string histogram_plot(const Axes& axes, const std::vector<std::pair<std::string, Histogram>>& layers);

/// Polyline per series with a legend.
std::string line_plot(const Axes& axes, const std::vector<Series>& series);

}  // namespace spw::svg
