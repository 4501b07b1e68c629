#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/column.hpp"

namespace lv {

inline constexpr std::int64_t kNoBin = -1;

struct Range {
  double min = 0, max = 0;
  std::size_t count = 0;  // non-missing values seen
};

Range numeric_range(std::span<const double> values, std::span<const std::uint8_t> missing);

// Equally spaced breaks anchor + i*binwidth for i = 0..m, m minimal with the
// last break strictly above data_max. An anchor above data_min is first moved
// down by whole bin widths so the first break covers data_min.
std::vector<double> compute_breaks(double anchor, double binwidth, double data_min, double data_max);

// Bin i holds breaks[i] <= v < breaks[i+1]; the last bin is also closed on the
// right. Missing or uncovered values map to kNoBin.
std::vector<std::int64_t> bin_membership(std::span<const double> values,
                                         std::span<const std::uint8_t> missing,
                                         std::span<const double> breaks);
std::int64_t bin_of(double value, std::span<const double> breaks);

double default_binwidth(const Range& range);
double default_anchor(const Range& range, double binwidth);

struct BinCounts {
  std::vector<std::size_t> count;
  std::vector<std::size_t> brushed;
};

BinCounts count_bins(std::span<const std::int64_t> membership, std::size_t nbins,
                     const BoolVector& brushed);

}  // namespace lv
