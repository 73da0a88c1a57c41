#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace paraosc {

/// 17-significant-digit, locale-independent, round-trip-safe formatting.
std::string format_double(double v);

/// Plain numeric CSV: one header row, then one row per call to row().
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void close();

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
};

}  // namespace paraosc
