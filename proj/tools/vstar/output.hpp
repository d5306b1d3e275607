// File output helpers. All floating-point values are written with 17 significant digits so
// that reruns produce byte-identical files.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace vstar::cli {

[[nodiscard]] std::string fmt_g(double v);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row_text(const std::vector<std::string>& cells);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

}  // namespace vstar::cli
