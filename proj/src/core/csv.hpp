#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "core/column.hpp"

namespace lv {

// RFC 4180 reader. A header row is required. A column is numeric iff every
// non-empty cell parses as a decimal number; otherwise it is categorical.
// Empty cells are missing.
RawTable parse_csv(std::string_view text);
RawTable load_csv(const std::filesystem::path& path);

// Numeric cells use the shortest decimal form that round-trips.
std::string write_csv(const RawTable& table);

bool parse_decimal(std::string_view cell, double& out);
std::string format_number(double v);

}  // namespace lv
