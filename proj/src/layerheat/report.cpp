#include "layerheat/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>

#include "layerheat/error.hpp"

namespace layerheat::report {

namespace {

constexpr double kWidth = 720.0, kHeight = 440.0;
constexpr double kLeft = 80.0, kRight = 170.0, kTop = 40.0, kBottom = 60.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string coord(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

// about five round ticks over [lo, hi]
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::io, "write to '" + path + "' failed");
}

}  // namespace

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, r.ptr);
}

std::string num(long long v) { return std::to_string(v); }

void Table::add(std::vector<std::string> row) {
  require(row.size() == header.size(), "table row width does not match the header");
  rows.push_back(std::move(row));
}

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

void write_csv(const std::string& path, const Table& table) { write_text(path, to_csv(table)); }

std::string to_svg(const Plot& plot) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.log_y && s.y[i] <= 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o.imbue(std::locale::classic());
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << coord(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\"" << coord(pw) << "\" height=\""
    << coord(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(x0, x1)) {
    const double X = px(t);
    o << "<line x1=\"" << coord(X) << "\" y1=\"" << coord(kTop + ph) << "\" x2=\"" << coord(X) << "\" y2=\""
      << coord(kTop + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << coord(X) << "\" y=\"" << coord(kTop + ph + 18) << "\" text-anchor=\"middle\">" << num(t)
      << "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    const double Y = py(t);
    const std::string label = plot.log_y ? "1e" + num(t) : num(t);
    o << "<line x1=\"" << coord(kLeft - 5) << "\" y1=\"" << coord(Y) << "\" x2=\"" << coord(kLeft) << "\" y2=\""
      << coord(Y) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << coord(kLeft - 8) << "\" y=\"" << coord(Y + 4) << "\" text-anchor=\"end\">" << escape(label)
      << "</text>\n";
  }
  o << "<text x=\"" << coord(kLeft + pw / 2) << "\" y=\"" << coord(kHeight - 15)
    << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << coord(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.log_y && s.y[i] <= 0.0)) continue;
      o << (first ? "" : " ") << coord(px(s.x[i])) << ',' << coord(py(ty(s.y[i])));
      first = false;
    }
    o << "\"/>\n";
    const double ly = kTop + 12 + 18.0 * k;
    o << "<line x1=\"" << coord(kLeft + pw + 12) << "\" y1=\"" << coord(ly - 4) << "\" x2=\""
      << coord(kLeft + pw + 32) << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << coord(kLeft + pw + 38) << "\" y=\"" << coord(ly) << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const Plot& plot) { write_text(path, to_svg(plot)); }

}  // namespace layerheat::report
