#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace perdiv::cli {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<Series> series;
  std::string note;  // emitted as an XML comment
};

void write_svg(std::ostream& out, const LinePlot& plot);

}  // namespace perdiv::cli
