#include "crowdfdb/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <system_error>

namespace crowdfdb {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return parse(in, path.string());
}

CsvTable CsvTable::parse(std::istream& in, std::string source) {
  CsvTable t;
  t.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw FormatError(t.source + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    t.rows.push_back({line_no, std::move(fields)});
  }
  if (!have_header) throw FormatError(t.source + ": missing header row");
  return t;
}

void CsvTable::require_header(const std::vector<std::string>& expected) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i >= expected.size() || header[i] != expected[i]) {
      bool known = false;
      for (const auto& e : expected) known = known || e == header[i];
      throw FormatError(source + ":1: " + (known ? "column '" + header[i] + "' out of order"
                                                 : "unknown column '" + header[i] + "'"));
    }
  }
  if (header.size() != expected.size()) {
    throw FormatError(source + ":1: missing column '" + expected[header.size()] + "'");
  }
}

void CsvTable::fail(const Row& row, std::size_t col, const std::string& what) const {
  throw FormatError(source + ":" + std::to_string(row.line) + ": field '" + header.at(col) +
                    "': " + what);
}

double CsvTable::number(const Row& row, std::size_t col) const {
  const std::string& s = row.fields.at(col);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail(row, col, "not a number: '" + s + "'");
  return v;
}

std::int64_t CsvTable::integer(const Row& row, std::size_t col) const {
  const std::string& s = row.fields.at(col);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail(row, col, "not an integer: '" + s + "'");
  return v;
}

}  // namespace crowdfdb
