#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "core/column.hpp"
#include "core/geometry.hpp"

namespace lv {

enum class PlotKind { scatter, histogram, bar, spine };

std::string_view to_string(PlotKind kind);

// Points are kept columnar; a scatter layer can hold millions of them.
struct PointBatch {
  std::vector<double> x, y;
  std::vector<Rgba> color;

  std::size_t size() const noexcept { return x.size(); }
  void push(double px, double py, Rgba c) {
    x.push_back(px);
    y.push_back(py);
    color.push_back(c);
  }
};

struct RectPrimitive {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  Rgba color;
  double fill = 1.0;  // filled fraction, used for partial highlighting
};

struct TextPrimitive {
  double x = 0, y = 0;
  std::string text;
};

// Primitive coordinates are in data space.
struct LayerScene {
  std::string name;
  int z = 0;
  PointBatch points;
  std::vector<RectPrimitive> rects;
  std::vector<TextPrimitive> texts;

  std::size_t primitive_count() const noexcept { return points.size() + rects.size() + texts.size(); }
};

struct SceneDiff {
  std::string plot_id;
  PlotKind kind = PlotKind::scatter;
  bool full = false;
  Limits limits;
  std::vector<LayerScene> layers;  // only layers that were dirty, unless full

  bool empty() const noexcept { return layers.empty(); }
  const LayerScene* layer(std::string_view name) const;
};

}  // namespace lv
