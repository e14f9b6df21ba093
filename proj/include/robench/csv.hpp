#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace robench::csv {

/// Minimal comma-separated reader for the toolkit's own numeric tables
/// (no quoting). Blank lines are skipped; the first non-blank line is the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  /// Index of a header column; throws FormatError when absent.
  std::size_t column(std::string_view name) const;
};

Table parse(std::string_view text);
std::vector<std::string> split_line(std::string_view line);

/// Strict numeric fields; "inf" is accepted for doubles. Throw FormatError.
double to_double(std::string_view field);
long long to_int(std::string_view field);

std::string read_file(const std::string& path);

}  // namespace robench::csv
