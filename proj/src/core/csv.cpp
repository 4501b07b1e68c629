#include "core/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "core/error.hpp"

namespace lv {

namespace {

struct Record {
  std::vector<std::string> cells;
  std::size_t line = 0;
};

// Splits text into records, honoring quoted fields that span lines.
std::vector<Record> split_records(std::string_view text) {
  std::vector<Record> records;
  Record current;
  std::string cell;
  std::size_t line = 1;
  current.line = line;
  bool in_quotes = false;
  bool cell_started = false;

  auto end_cell = [&] {
    current.cells.push_back(std::move(cell));
    cell.clear();
    cell_started = false;
  };
  auto end_record = [&] {
    end_cell();
    records.push_back(std::move(current));
    current = Record{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (cell_started)
          throw Error(ErrorCode::parse, "line " + std::to_string(line) + ": stray quote in unquoted field");
        in_quotes = true;
        cell_started = true;
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        ++line;
        end_record();
        break;
      default:
        cell.push_back(c);
        cell_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::parse, "line " + std::to_string(current.line) + ": unterminated quoted field");
  if (cell_started || !current.cells.empty() || !cell.empty()) end_record();
  return records;
}

bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_cell(std::ostringstream& os, std::string_view s) {
  if (!needs_quoting(s)) {
    os << s;
    return;
  }
  os << '"';
  for (char c : s) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

}  // namespace

bool parse_decimal(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  // from_chars also accepts inf/nan/hex-free forms; restrict to decimal syntax.
  std::size_t i = 0;
  if (cell[i] == '+' || cell[i] == '-') ++i;
  bool digits = false;
  while (i < cell.size() && std::isdigit(static_cast<unsigned char>(cell[i]))) ++i, digits = true;
  if (i < cell.size() && cell[i] == '.') {
    ++i;
    while (i < cell.size() && std::isdigit(static_cast<unsigned char>(cell[i]))) ++i, digits = true;
  }
  if (!digits) return false;
  if (i < cell.size() && (cell[i] == 'e' || cell[i] == 'E')) {
    ++i;
    if (i < cell.size() && (cell[i] == '+' || cell[i] == '-')) ++i;
    bool exp_digits = false;
    while (i < cell.size() && std::isdigit(static_cast<unsigned char>(cell[i]))) ++i, exp_digits = true;
    if (!exp_digits) return false;
  }
  if (i != cell.size()) return false;
  std::string_view body = cell;
  if (body.front() == '+') body.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), out);
  return ec == std::errc{} && ptr == body.data() + body.size() && std::isfinite(out);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RawTable parse_csv(std::string_view text) {
  auto records = split_records(text);
  if (records.empty()) throw Error(ErrorCode::parse, "empty CSV input: header row required");

  const auto& header = records.front().cells;
  const std::size_t ncol = header.size();
  const std::size_t nrow = records.size() - 1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].cells.size() != ncol)
      throw Error(ErrorCode::parse, "line " + std::to_string(records[r].line) + ": expected " +
                                        std::to_string(ncol) + " fields, found " +
                                        std::to_string(records[r].cells.size()));
  }

  RawTable table;
  for (std::size_t c = 0; c < ncol; ++c) {
    std::vector<double> nums(nrow, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint8_t> missing(nrow, 0);
    bool numeric = true;
    for (std::size_t r = 0; r < nrow; ++r) {
      const auto& cell = records[r + 1].cells[c];
      if (cell.empty()) {
        missing[r] = 1;
        continue;
      }
      if (numeric && !parse_decimal(cell, nums[r])) numeric = false;
    }
    if (numeric) {
      table.columns.push_back(Column::numeric(header[c], std::move(nums), std::move(missing)));
      continue;
    }
    Categorical cat;
    cat.codes.assign(nrow, -1);
    std::unordered_map<std::string_view, std::int32_t> seen;
    for (std::size_t r = 0; r < nrow; ++r) {
      if (missing[r]) continue;
      const auto& cell = records[r + 1].cells[c];
      auto [it, inserted] = seen.try_emplace(cell, static_cast<std::int32_t>(cat.levels.size()));
      if (inserted) cat.levels.push_back(cell);
      cat.codes[r] = it->second;
    }
    table.columns.push_back(Column::categorical(header[c], std::move(cat), std::move(missing)));
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto text = buf.str();
  if (text.empty()) throw Error(ErrorCode::parse, "'" + path.string() + "' is empty");
  return parse_csv(text);
}

std::string write_csv(const RawTable& table) {
  std::ostringstream os;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) os << ',';
    write_cell(os, table.columns[c].name);
  }
  os << '\n';
  for (std::size_t r = 0; r < table.nrow(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) os << ',';
      const auto& col = table.columns[c];
      if (col.is_missing(r)) continue;
      switch (col.kind()) {
        case ColumnKind::numeric: os << format_number(col.as_numeric()[r]); break;
        case ColumnKind::categorical: {
          const auto& cat = col.as_categorical();
          write_cell(os, cat.levels[static_cast<std::size_t>(cat.codes[r])]);
          break;
        }
        case ColumnKind::boolean: os << (col.as_boolean()[r] ? "TRUE" : "FALSE"); break;
        case ColumnKind::color: os << format_color(col.as_color()[r]); break;
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace lv
