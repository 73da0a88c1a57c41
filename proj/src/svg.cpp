#include "paraosc/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace paraosc {

namespace {

constexpr double kWidth = 900, kHeight = 540;
constexpr double kLeft = 70, kRight = 30, kTop = 45, kBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};

std::string num(double v) {
  if (!std::isfinite(v)) return "0";
  char buf[48];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

std::string coord(double v) {
  char buf[48];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_line_plot: cannot open " + path.string());

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      } else {
        x_min = std::min(x_min, s.x[i]);
        x_max = std::max(x_max, s.x[i]);
        y_min = std::min(y_min, s.y[i]);
        y_max = std::max(y_max, s.y[i]);
      }
    }
  if (x_max - x_min <= 0) x_max = x_min + 1;
  if (y_max - y_min <= 0) {
    const double pad = std::max(1e-9, std::abs(y_min) * 0.1 + 1e-9);
    y_min -= pad;
    y_max += pad;
  } else {
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // axes, ticks, grid
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / ticks;
    const double fy = y_min + (y_max - y_min) * i / ticks;
    const double gx = px(fx);
    const double gy = py(fy);
    out << "<line x1=\"" << coord(gx) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << coord(gx)
        << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << coord(gx) << "\" y=\"" << kTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
        << "</text>\n"
        << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << coord(gy) << "\" x2=\"" << kLeft
        << "\" y2=\"" << coord(gy) << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << coord(gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
        << "</text>\n";
    if (i > 0 && i < ticks)
      out << "<line x1=\"" << kLeft << "\" y1=\"" << coord(gy) << "\" x2=\"" << kLeft + plot_w
          << "\" y2=\"" << coord(gy) << "\" stroke=\"#eee\"/>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n"
      << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      if (i) out << ' ';
      out << coord(px(ser.x[i])) << ',' << coord(py(ser.y[i]));
    }
    out << "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << coord(ly - 4) << "\" x2=\""
        << kLeft + plot_w - 125 << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + plot_w - 118 << "\" y=\"" << coord(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << ser.name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace paraosc
