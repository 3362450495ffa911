#pragma once

// Minimal SVG line charts for scenario outputs.

#include <filesystem>
#include <string>
#include <vector>

namespace torpsi::detail {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec,
                     const std::vector<Series>& series);

}  // namespace torpsi::detail
