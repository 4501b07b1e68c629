#include "core/column.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_map>

#include "core/error.hpp"

namespace lv {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::uint8_t> fit_mask(std::vector<std::uint8_t> mask, std::size_t n) {
  if (mask.empty()) mask.assign(n, 0);
  return mask;
}

}  // namespace

std::optional<Rgba> parse_color(std::string_view text) {
  static constexpr std::pair<std::string_view, Rgba> named[] = {
      {"black", {0, 0, 0, 255}},       {"white", {255, 255, 255, 255}}, {"red", {255, 0, 0, 255}},
      {"green", {0, 128, 0, 255}},     {"blue", {0, 0, 255, 255}},      {"orange", {255, 165, 0, 255}},
      {"gold", {255, 215, 0, 255}},    {"purple", {128, 0, 128, 255}},  {"gray", {128, 128, 128, 255}},
      {"grey", {128, 128, 128, 255}},
  };
  for (const auto& [name, rgba] : named)
    if (text == name) return rgba;
  if (text.size() != 7 && text.size() != 9) return std::nullopt;
  if (text[0] != '#') return std::nullopt;
  std::uint8_t bytes[4] = {0, 0, 0, 255};
  for (std::size_t i = 0; i < (text.size() - 1) / 2; ++i) {
    int hi = hex_digit(text[1 + 2 * i]);
    int lo = hex_digit(text[2 + 2 * i]);
    if (hi < 0 || lo < 0) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return Rgba{bytes[0], bytes[1], bytes[2], bytes[3]};
}

std::string format_color(Rgba c) {
  char buf[10];
  if (c.a == 0xff)
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  else
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x%02x", c.r, c.g, c.b, c.a);
  return buf;
}

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::boolean: return "boolean";
    case ColumnKind::color: return "color";
  }
  return "?";
}

Column Column::numeric(std::string name, std::vector<double> v, std::vector<std::uint8_t> missing) {
  auto n = v.size();
  return Column{std::move(name), std::move(v), fit_mask(std::move(missing), n)};
}

Column Column::categorical(std::string name, std::vector<std::string> labels) {
  Categorical cat;
  std::unordered_map<std::string, std::int32_t> index;
  cat.codes.reserve(labels.size());
  for (auto& label : labels) {
    auto [it, inserted] = index.try_emplace(label, static_cast<std::int32_t>(cat.levels.size()));
    if (inserted) cat.levels.push_back(label);
    cat.codes.push_back(it->second);
  }
  auto n = cat.codes.size();
  return Column{std::move(name), std::move(cat), std::vector<std::uint8_t>(n, 0)};
}

Column Column::categorical(std::string name, Categorical data, std::vector<std::uint8_t> missing) {
  auto n = data.codes.size();
  if (missing.empty()) {
    missing.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) missing[i] = data.codes[i] < 0 ? 1 : 0;
  }
  return Column{std::move(name), std::move(data), std::move(missing)};
}

Column Column::boolean(std::string name, BoolVector v) {
  auto n = v.size();
  return Column{std::move(name), std::move(v), std::vector<std::uint8_t>(n, 0)};
}

Column Column::color(std::string name, std::vector<Rgba> v) {
  auto n = v.size();
  return Column{std::move(name), std::move(v), std::vector<std::uint8_t>(n, 0)};
}

std::size_t Column::size() const noexcept {
  return std::visit(
      [](const auto& v) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Categorical>)
          return v.codes.size();
        else
          return v.size();
      },
      values);
}

std::span<const double> Column::as_numeric() const {
  if (auto* v = std::get_if<std::vector<double>>(&values)) return *v;
  throw Error(ErrorCode::type_mismatch, "column '" + name + "' is not numeric");
}

const Categorical& Column::as_categorical() const {
  if (auto* v = std::get_if<Categorical>(&values)) return *v;
  throw Error(ErrorCode::type_mismatch, "column '" + name + "' is not categorical");
}

const BoolVector& Column::as_boolean() const {
  if (auto* v = std::get_if<BoolVector>(&values)) return *v;
  throw Error(ErrorCode::type_mismatch, "column '" + name + "' is not boolean");
}

std::span<const Rgba> Column::as_color() const {
  if (auto* v = std::get_if<std::vector<Rgba>>(&values)) return *v;
  throw Error(ErrorCode::type_mismatch, "column '" + name + "' is not a color column");
}

void Column::validate() const {
  if (missing.size() != size())
    throw Error(ErrorCode::invalid_argument, "column '" + name + "': missing mask length mismatch");
  if (auto* cat = std::get_if<Categorical>(&values)) {
    auto nlev = static_cast<std::int32_t>(cat->levels.size());
    for (std::size_t i = 0; i < cat->codes.size(); ++i) {
      auto code = cat->codes[i];
      if (code >= nlev || (code < 0 && !missing[i]))
        throw Error(ErrorCode::invalid_argument,
                    "column '" + name + "': invalid level index at row " + std::to_string(i));
    }
  }
}

bool Column::same_values(const Column& other) const {
  if (missing != other.missing || values.index() != other.values.index()) return false;
  // Missing numeric cells hold NaN, so compare only the present ones.
  if (auto* a = std::get_if<std::vector<double>>(&values)) {
    const auto& b = std::get<std::vector<double>>(other.values);
    for (std::size_t i = 0; i < a->size(); ++i)
      if (!missing[i] && (*a)[i] != b[i]) return false;
    return true;
  }
  return values == other.values;
}

const Column* RawTable::find(std::string_view name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

RowSet normalize_rows(std::vector<RowIndex> rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

RowSet rows_where(const BoolVector& flags) {
  RowSet out;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) out.push_back(i);
  return out;
}

}  // namespace lv
