#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crowdfdb {

/// Malformed input file; the message names the file, line and field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to exactly `v`.
std::string format_number(double v);

std::vector<std::string> split_fields(std::string_view line, char delim = ',');

/// Comma-delimited text with a header row. Blank lines are skipped.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;

  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(std::istream& in, std::string source);

  /// Requires the header to be exactly `expected` (same names, same order).
  void require_header(const std::vector<std::string>& expected) const;

  double number(const Row& row, std::size_t col) const;
  std::int64_t integer(const Row& row, std::size_t col) const;
  [[noreturn]] void fail(const Row& row, std::size_t col, const std::string& what) const;
};

}  // namespace crowdfdb
