#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace paraosc {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static line chart rendered in-process; no external renderer. Output is
/// byte-deterministic for identical inputs.
void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

}  // namespace paraosc
