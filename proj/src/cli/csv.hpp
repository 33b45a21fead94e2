#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace perdiv::cli {

// 12 significant digits, '.' separator, "nan"/"inf" spelled out; no locale.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void row(std::initializer_list<double> values);

 private:
  std::ostream& out_;
  std::size_t width_;
};

}  // namespace perdiv::cli
