#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lv {

using RowIndex = std::size_t;

// Sorted, duplicate-free row indices (0-based).
using RowSet = std::vector<RowIndex>;

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

// Parses "#rrggbb" / "#rrggbbaa"; returns nullopt on anything else.
std::optional<Rgba> parse_color(std::string_view text);
// "#rrggbb" when opaque, "#rrggbbaa" otherwise.
std::string format_color(Rgba c);

enum class ColumnKind { numeric, categorical, boolean, color };

std::string_view to_string(ColumnKind kind);

struct Categorical {
  std::vector<std::string> levels;
  std::vector<std::int32_t> codes;  // index into levels, or -1 when missing
  friend bool operator==(const Categorical&, const Categorical&) = default;
};

using BoolVector = std::vector<std::uint8_t>;
using ColumnValues =
    std::variant<std::vector<double>, Categorical, BoolVector, std::vector<Rgba>>;

struct Column {
  std::string name;
  ColumnValues values;
  std::vector<std::uint8_t> missing;  // 1 = missing; always size() long

  static Column numeric(std::string name, std::vector<double> v,
                        std::vector<std::uint8_t> missing = {});
  static Column categorical(std::string name, std::vector<std::string> labels);
  static Column categorical(std::string name, Categorical data,
                            std::vector<std::uint8_t> missing = {});
  static Column boolean(std::string name, BoolVector v);
  static Column color(std::string name, std::vector<Rgba> v);

  ColumnKind kind() const noexcept { return static_cast<ColumnKind>(values.index()); }
  std::size_t size() const noexcept;
  bool is_missing(RowIndex i) const noexcept { return missing[i] != 0; }

  std::span<const double> as_numeric() const;
  const Categorical& as_categorical() const;
  const BoolVector& as_boolean() const;
  std::span<const Rgba> as_color() const;

  // Throws if kinds differ, level index invalid, or lengths disagree.
  void validate() const;
  bool same_values(const Column& other) const;
};

// A plain typed table before augmentation.
struct RawTable {
  std::vector<Column> columns;

  std::size_t nrow() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  const Column* find(std::string_view name) const;
};

RowSet normalize_rows(std::vector<RowIndex> rows);
RowSet rows_where(const BoolVector& flags);

}  // namespace lv
