#pragma once

#include <string>
#include <vector>

namespace poselift {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

// Writes a static SVG line plot (axes, ticks, legend). Series with mismatched
// x/y lengths or no points throw ShapeMismatch; IO failures throw IoError.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series);

}  // namespace poselift
