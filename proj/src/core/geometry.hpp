#pragma once

#include <algorithm>

namespace lv {

struct Point {
  double x = 0, y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Closed data-space rectangle; may be degenerate (a point probe).
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  static Rect spanning(Point a, Point b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
  }
  bool contains(double x, double y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool contains(Point p) const noexcept { return contains(p.x, p.y); }
  Rect translated(double dx, double dy) const noexcept { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Data-space axis limits. Valid iff xmin < xmax and ymin < ymax.
struct Limits {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  double width() const noexcept { return xmax - xmin; }
  double height() const noexcept { return ymax - ymin; }
  bool valid() const noexcept;
  friend bool operator==(const Limits&, const Limits&) = default;
};

}  // namespace lv
