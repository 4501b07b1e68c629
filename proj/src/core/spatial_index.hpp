#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/column.hpp"
#include "core/geometry.hpp"

namespace lv {

// Uniform bucket grid over point coordinates for rectangle queries. Points
// are stored contiguously per cell; queries test every point of each
// overlapped cell, so results match a linear scan exactly.
class GridIndex {
 public:
  // Empty masks mean nothing is missing. Non-finite coordinates are skipped.
  void build(std::span<const double> x, std::span<const double> y,
             std::span<const std::uint8_t> missing_x, std::span<const std::uint8_t> missing_y);
  void clear();
  bool built() const noexcept { return built_; }
  std::size_t size() const noexcept { return rows_.size(); }

  // Rows with x in [x0, x1] and y in [y0, y1], ascending.
  RowSet query(const Rect& rect) const;

 private:
  std::size_t cell_x(double x) const noexcept;
  std::size_t cell_y(double y) const noexcept;

  bool built_ = false;
  double x0_ = 0, y0_ = 0, inv_w_ = 1, inv_h_ = 1;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> xs_, ys_;
};

}  // namespace lv
