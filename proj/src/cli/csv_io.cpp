#include "rfpls/cli.hpp"

#include "rfpls/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <system_error>

namespace rfpls::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, std::size_t column, const std::string& what) {
  throw InputError(source + ": line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

double parse_number(std::string_view field, const std::string& source, std::size_t line, std::size_t column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    fail(source, line, column, "expected a number, found '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) fail(source, line, column, "missing or non-finite value");
  return value;
}

// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

CurveTable parse_curve_csv(std::istream& in, const std::string& source) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw InputError(source + ": empty file");
  const auto header = split(lines.front().second);
  if (header.size() < 2) fail(source, lines.front().first, 1, "header needs an id column and grid values");

  CurveTable table;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const double t = parse_number(header[c], source, lines.front().first, c + 1);
    if (!table.grid.empty() && !(t > table.grid.back())) {
      fail(source, lines.front().first, c + 1, "grid values must be strictly increasing");
    }
    table.grid.push_back(t);
  }

  const auto cols = static_cast<Eigen::Index>(table.grid.size());
  table.values.resize(static_cast<Eigen::Index>(lines.size() - 1), cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, text] = lines[r];
    const auto fields = split(text);
    if (fields.size() != header.size()) {
      fail(source, number, std::min(fields.size(), header.size()) + 1,
           "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail(source, number, 1, "empty sample id");
    table.ids.emplace_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      table.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) =
          parse_number(fields[c], source, number, c + 1);
    }
  }
  if (table.ids.empty()) throw InputError(source + ": no sample rows");
  return table;
}

CurveTable read_curve_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_curve_csv(in, path.string());
}

ResponseTable parse_response_csv(std::istream& in, const std::string& source) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw InputError(source + ": empty file");
  if (split(lines.front().second).size() != 2) fail(source, lines.front().first, 1, "header must be 'id,y'");

  ResponseTable table;
  table.y.resize(static_cast<Eigen::Index>(lines.size() - 1));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, text] = lines[r];
    const auto fields = split(text);
    if (fields.size() != 2) {
      fail(source, number, std::min<std::size_t>(fields.size(), 2) + 1,
           "expected 2 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail(source, number, 1, "empty sample id");
    table.ids.emplace_back(fields[0]);
    table.y(static_cast<Eigen::Index>(r - 1)) = parse_number(fields[1], source, number, 2);
  }
  if (table.ids.empty()) throw InputError(source + ": no sample rows");
  return table;
}

ResponseTable read_response_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_response_csv(in, path.string());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace rfpls::cli
