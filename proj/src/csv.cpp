#include "robench/csv.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw FormatError(fmt::format("csv: missing column '{}'", name));
}

Table parse(std::string_view text) {
  Table t;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    ++line_no;
    pos = nl + 1;
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    auto fields = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size())
        throw FormatError(fmt::format("csv line {}: expected {} fields, got {}", line_no,
                                      t.header.size(), fields.size()));
      t.rows.push_back(std::move(fields));
      t.line_numbers.push_back(line_no);
    }
    if (nl == text.size()) break;
  }
  if (t.header.empty()) throw FormatError("csv: missing header row");
  return t;
}

double to_double(std::string_view field) {
  if (field == "inf" || field == "+inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw FormatError(fmt::format("csv: '{}' is not a number", field));
  return v;
}

long long to_int(std::string_view field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw FormatError(fmt::format("csv: '{}' is not an integer", field));
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace robench::csv
