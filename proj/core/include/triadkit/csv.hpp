#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace triadkit::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split(std::string_view line);

/// Streams rows of a headed CSV file, tracking 1-based line numbers.
class Reader {
 public:
  /// Throws ValidationError if the file is missing or the header differs
  /// from `expected` (extra trailing columns are accepted). A zero-byte file
  /// reads as header-only.
  Reader(const std::filesystem::path& path, const std::vector<std::string>& expected);

  /// Next non-empty record; false at end of file.
  bool next(std::vector<std::string>& fields);
  std::size_t line() const { return line_; }
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::ifstream in_;
  std::string buf_;
  std::size_t line_ = 0;
  std::vector<std::string> header_;
};

std::int64_t parse_int(std::string_view s, std::size_t line, std::string_view what);
double parse_double(std::string_view s, std::size_t line, std::string_view what);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace triadkit::csv
