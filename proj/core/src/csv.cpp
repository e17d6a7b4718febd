#include "geoctx/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "geoctx/error.hpp"

namespace geoctx {

namespace {

bool needs_quotes(std::string_view cell) {
  return cell.find_first_of(",\"\n\r") != std::string_view::npos;
}

void append_cell(std::string& out, std::string_view cell) {
  if (!needs_quotes(cell)) {
    out.append(cell);
    return;
  }
  out.push_back('"');
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw Error(ErrorKind::MissingColumn, "column '" + std::string(name) + "' not found");
}

void CsvTable::require_header(const std::vector<std::string_view>& expected,
                              std::string_view what) const {
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size() || header[i] != expected[i]) {
      throw Error(ErrorKind::MissingColumn,
                  std::string(what) + ": expected column '" + std::string(expected[i]) +
                      "' at position " + std::to_string(i + 1));
    }
  }
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  bool any_in_record = false;

  auto end_cell = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    cell_started = false;
    any_in_record = true;
  };
  auto end_record = [&] {
    if (any_in_record || cell_started || !cell.empty()) {
      end_cell();
      records.push_back(std::move(record));
    }
    record.clear();
    any_in_record = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        cell_started = true;
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        cell.push_back(c);
        cell_started = true;
    }
  }
  end_record();

  CsvTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  for (auto& h : table.header) h = trim(h);
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    table.header[0].erase(0, 3);
  }
  table.rows.assign(std::make_move_iterator(records.begin() + 1),
                    std::make_move_iterator(records.end()));
  return table;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& rec) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (i) out.push_back(',');
      append_cell(out, rec[i]);
    }
    out.push_back('\n');
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_text_file(path, format_csv(table));
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error(ErrorKind::IoFailure, "cannot format double");
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  const char* first = t.data();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  const char* first = t.data();
  if (*first == '+') ++first;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

double parse_double_cell(std::string_view cell, std::size_t row, std::string_view column) {
  if (auto v = parse_double(cell)) return *v;
  throw Error(ErrorKind::BadNumericCell, "row " + std::to_string(row) + ", column '" +
                                             std::string(column) + "': '" + std::string(cell) +
                                             "'");
}

std::int64_t parse_int_cell(std::string_view cell, std::size_t row, std::string_view column) {
  if (auto v = parse_int(cell)) return *v;
  throw Error(ErrorKind::BadNumericCell, "row " + std::to_string(row) + ", column '" +
                                             std::string(column) + "': '" + std::string(cell) +
                                             "'");
}

std::optional<double> parse_optional_double_cell(std::string_view cell, std::size_t row,
                                                 std::string_view column) {
  if (trim(cell).empty()) return std::nullopt;
  return parse_double_cell(cell, row, column);
}

}  // namespace geoctx
