#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace homog {

/// Fixed scientific notation, 17 significant digits.
std::string format_double(double x);

/// Minimal CSV emitter. Numbers go through format_double.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(const char* s) { return cell(std::string(s)); }
  void end_row();

 private:
  void sep();
  std::ostream& os_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace homog
