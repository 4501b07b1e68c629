#include "core/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace lv {

namespace {
constexpr std::size_t kPointsPerCell = 4;
constexpr std::size_t kMaxCellsPerAxis = 2048;
}  // namespace

void GridIndex::clear() {
  built_ = false;
  cell_start_.clear();
  rows_.clear();
  xs_.clear();
  ys_.clear();
}

void GridIndex::build(std::span<const double> x, std::span<const double> y,
                      std::span<const std::uint8_t> missing_x,
                      std::span<const std::uint8_t> missing_y) {
  clear();
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "x/y length mismatch");
  if ((!missing_x.empty() && missing_x.size() != x.size()) ||
      (!missing_y.empty() && missing_y.size() != y.size()))
    throw Error(ErrorCode::invalid_argument, "missing mask length mismatch");
  if (x.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::invalid_argument, "too many points for the grid index");

  std::vector<std::uint32_t> present;
  present.reserve(x.size());
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((!missing_x.empty() && missing_x[i]) || (!missing_y.empty() && missing_y[i])) continue;
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    present.push_back(static_cast<std::uint32_t>(i));
    xmin = std::min(xmin, x[i]);
    xmax = std::max(xmax, x[i]);
    ymin = std::min(ymin, y[i]);
    ymax = std::max(ymax, y[i]);
  }
  built_ = true;
  if (present.empty()) {
    cell_start_.assign(2, 0);
    nx_ = ny_ = 1;
    return;
  }

  const auto side = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(present.size()) / kPointsPerCell)));
  nx_ = ny_ = std::clamp<std::size_t>(side, 1, kMaxCellsPerAxis);
  x0_ = xmin;
  y0_ = ymin;
  inv_w_ = xmax > xmin ? static_cast<double>(nx_) / (xmax - xmin) : 0.0;
  inv_h_ = ymax > ymin ? static_cast<double>(ny_) / (ymax - ymin) : 0.0;

  // Counting sort by cell keeps rows ascending within each cell.
  std::vector<std::uint32_t> cell_of(present.size());
  cell_start_.assign(nx_ * ny_ + 1, 0);
  for (std::size_t k = 0; k < present.size(); ++k) {
    const auto i = present[k];
    const auto c = cell_y(y[i]) * nx_ + cell_x(x[i]);
    cell_of[k] = static_cast<std::uint32_t>(c);
    ++cell_start_[c + 1];
  }
  for (std::size_t c = 0; c < nx_ * ny_; ++c) cell_start_[c + 1] += cell_start_[c];
  rows_.resize(present.size());
  xs_.resize(present.size());
  ys_.resize(present.size());
  std::vector<std::uint32_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t k = 0; k < present.size(); ++k) {
    const auto slot = cursor[cell_of[k]]++;
    const auto i = present[k];
    rows_[slot] = i;
    xs_[slot] = x[i];
    ys_[slot] = y[i];
  }
}

std::size_t GridIndex::cell_x(double x) const noexcept {
  const double f = (x - x0_) * inv_w_;
  if (!(f > 0)) return 0;
  if (f >= static_cast<double>(nx_)) return nx_ - 1;
  return static_cast<std::size_t>(f);
}

std::size_t GridIndex::cell_y(double y) const noexcept {
  const double f = (y - y0_) * inv_h_;
  if (!(f > 0)) return 0;
  if (f >= static_cast<double>(ny_)) return ny_ - 1;
  return static_cast<std::size_t>(f);
}

RowSet GridIndex::query(const Rect& rect) const {
  RowSet out;
  if (!built_ || rows_.empty() || rect.x0 > rect.x1 || rect.y0 > rect.y1) return out;
  // Cell assignment is monotone in the coordinate, so the overlapped cells are
  // exactly those between the cells of the rectangle corners.
  const auto cx0 = cell_x(rect.x0), cx1 = cell_x(rect.x1);
  const auto cy0 = cell_y(rect.y0), cy1 = cell_y(rect.y1);
  for (auto cy = cy0; cy <= cy1; ++cy) {
    for (auto cx = cx0; cx <= cx1; ++cx) {
      const auto c = cy * nx_ + cx;
      for (auto s = cell_start_[c]; s < cell_start_[c + 1]; ++s)
        if (rect.contains(xs_[s], ys_[s])) out.push_back(rows_[s]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lv
