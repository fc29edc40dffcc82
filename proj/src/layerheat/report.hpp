#pragma once

#include <string>
#include <vector>

namespace layerheat::report {

// Locale-independent, 15 significant digits ("nan", "inf" for non-finite values).
std::string num(double v);
std::string num(long long v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // formatted cells

  void add(std::vector<std::string> row);
};

std::string to_csv(const Table& table);
void write_csv(const std::string& path, const Table& table);

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct Plot {
  std::string title;
  std::string x_label, y_label;
  bool log_y = false;
  std::vector<Series> series;
};

// Self-contained SVG line plot with axis ticks.
std::string to_svg(const Plot& plot);
void write_svg(const std::string& path, const Plot& plot);

}  // namespace layerheat::report
