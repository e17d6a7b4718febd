#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geoctx {

// RFC 4180-style comma separated table. Cells are kept as text; typed access
// goes through the parse_* helpers so that failures carry row/column context.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws MissingColumn.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;

  // Throws MissingColumn unless the header starts with exactly `expected`.
  void require_header(const std::vector<std::string_view>& expected,
                      std::string_view what) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

// `row` is the 1-based data row (header excluded) used in diagnostics.
double parse_double_cell(std::string_view cell, std::size_t row, std::string_view column);
std::int64_t parse_int_cell(std::string_view cell, std::size_t row, std::string_view column);
std::optional<double> parse_optional_double_cell(std::string_view cell, std::size_t row,
                                                 std::string_view column);

// Strict whole-string numeric parsing, no diagnostics.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

}  // namespace geoctx
