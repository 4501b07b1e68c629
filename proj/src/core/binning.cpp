#include "core/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace lv {

namespace {
constexpr double kMaxBins = 1e7;
}

Range numeric_range(std::span<const double> values, std::span<const std::uint8_t> missing) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if ((!missing.empty() && missing[i]) || std::isnan(values[i])) continue;
    r.min = std::min(r.min, values[i]);
    r.max = std::max(r.max, values[i]);
    ++r.count;
  }
  if (r.count == 0) r.min = r.max = 0;
  return r;
}

std::vector<double> compute_breaks(double anchor, double binwidth, double data_min, double data_max) {
  if (!(binwidth > 0) || !std::isfinite(binwidth))
    throw Error(ErrorCode::invalid_argument, "binwidth must be positive");
  if (!std::isfinite(anchor) || !std::isfinite(data_min) || !std::isfinite(data_max) || data_min > data_max)
    throw Error(ErrorCode::invalid_argument, "compute_breaks: invalid anchor or data range");
  if ((data_max - std::min(anchor, data_min)) / binwidth > kMaxBins)
    throw Error(ErrorCode::invalid_argument, "binwidth too small for the data range");

  if (anchor > data_min) anchor -= std::ceil((anchor - data_min) / binwidth) * binwidth;
  while (anchor > data_min) anchor -= binwidth;  // rounding guard

  auto m = static_cast<std::int64_t>(std::floor((data_max - anchor) / binwidth)) + 1;
  m = std::max<std::int64_t>(m, 1);
  while (m > 1 && anchor + static_cast<double>(m - 1) * binwidth > data_max) --m;
  while (anchor + static_cast<double>(m) * binwidth <= data_max) ++m;

  std::vector<double> breaks(static_cast<std::size_t>(m) + 1);
  for (std::int64_t i = 0; i <= m; ++i) breaks[i] = anchor + static_cast<double>(i) * binwidth;
  return breaks;
}

std::int64_t bin_of(double value, std::span<const double> breaks) {
  if (breaks.size() < 2 || std::isnan(value)) return kNoBin;
  if (value < breaks.front() || value > breaks.back()) return kNoBin;
  if (value == breaks.back()) return static_cast<std::int64_t>(breaks.size()) - 2;
  auto it = std::upper_bound(breaks.begin(), breaks.end(), value);
  return static_cast<std::int64_t>(it - breaks.begin()) - 1;
}

std::vector<std::int64_t> bin_membership(std::span<const double> values,
                                         std::span<const std::uint8_t> missing,
                                         std::span<const double> breaks) {
  std::vector<std::int64_t> out(values.size(), kNoBin);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!missing.empty() && missing[i]) continue;
    out[i] = bin_of(values[i], breaks);
  }
  return out;
}

double default_binwidth(const Range& range) {
  const double span = range.max - range.min;
  return span > 0 ? span / 30.0 : 1.0;
}

double default_anchor(const Range& range, double binwidth) {
  return binwidth * std::floor(range.min / binwidth);
}

BinCounts count_bins(std::span<const std::int64_t> membership, std::size_t nbins,
                     const BoolVector& brushed) {
  BinCounts out{std::vector<std::size_t>(nbins, 0), std::vector<std::size_t>(nbins, 0)};
  for (std::size_t i = 0; i < membership.size(); ++i) {
    const auto b = membership[i];
    if (b < 0) continue;
    ++out.count[b];
    if (brushed[i]) ++out.brushed[b];
  }
  return out;
}

}  // namespace lv
