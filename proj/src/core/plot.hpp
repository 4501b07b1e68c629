#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/binning.hpp"
#include "core/geometry.hpp"
#include "core/meta.hpp"
#include "core/mutaframe.hpp"
#include "core/scene.hpp"
#include "core/spatial_index.hpp"

namespace lv {

inline constexpr std::string_view kMainLayer = "main";
inline constexpr std::string_view kBrushLayer = "brush";
inline constexpr Rgba kDefaultHighlight{0xff, 0xd7, 0x00, 0xff};
inline constexpr double kLimitsMargin = 0.04;
inline constexpr double kPickRadiusPx = 8.0;

struct Viewport {
  double width = 640;
  double height = 480;
};

struct Layer {
  std::string name;
  int z = 0;
  bool dirty = true;
  std::uint64_t dirty_marks = 0;       // mark_dirty calls since creation
  std::size_t emitted_primitives = 0;  // primitive count of the last emission
};

Limits padded_limits(double xmin, double xmax, double ymin, double ymax,
                     double margin = kLimitsMargin);

// A view bound to one mutaframe and its own MetaObject. Listeners installed
// at construction mark layers dirty; scene() recomputes and emits only dirty
// layers. Listeners are removed when the model is destroyed.
class PlotModel {
 public:
  PlotModel(const PlotModel&) = delete;
  PlotModel& operator=(const PlotModel&) = delete;
  virtual ~PlotModel();

  const std::string& id() const noexcept { return id_; }
  PlotKind kind() const noexcept { return kind_; }
  const std::shared_ptr<Mutaframe>& table() const noexcept { return table_; }
  MetaObject& meta() noexcept { return *meta_; }
  const MetaObject& meta() const noexcept { return *meta_; }
  const Limits& limits() const { return meta_->limits("limits"); }
  Rgba highlight() const;

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::string_view name) const;
  bool dirty(std::string_view name) const { return layer(name).dirty; }
  bool any_dirty() const noexcept;
  void mark_dirty(std::string_view name);

  // Emits dirty layers with freshly computed primitives and clears their flags.
  SceneDiff scene();
  // Every layer, regardless of dirty state; also clears flags.
  SceneDiff full_scene();

  // `rect` must be normalized (x0 <= x1, y0 <= y1).
  virtual RowSet hit_test_rect(const Rect& rect) const = 0;
  virtual QueryPayload query_payload(Point pos, const Viewport& viewport) const = 0;

  // Columns whose data the plot draws (excluding augmented ones).
  virtual std::vector<std::string> bound_columns() const = 0;
  // Limits that show all of the data; zoom clamps relative to this extent.
  virtual Limits home_limits() const = 0;

 protected:
  PlotModel(std::string id, PlotKind kind, std::shared_ptr<Mutaframe> table,
            std::vector<std::pair<std::string, FieldValue>> meta_fields);

  void watch_table(std::vector<std::string> columns, Listener callback);
  void watch_meta(std::string_view field, FieldListener callback);
  Layer& layer_mut(std::string_view name);
  QueryPayload labelled(QueryPayload payload) const;

  virtual LayerScene build_layer(std::string_view name) const = 0;
  virtual std::string default_label(const QueryPayload& payload) const;

 private:
  std::string id_;
  PlotKind kind_;
  std::shared_ptr<Mutaframe> table_;
  std::shared_ptr<MetaObject> meta_;
  std::vector<Layer> layers_;
  std::vector<ListenerId> table_listeners_;
  std::vector<ListenerId> meta_listeners_;
};

class ScatterPlot final : public PlotModel {
 public:
  ScatterPlot(std::string id, std::shared_ptr<Mutaframe> table, std::string x, std::string y);

  const std::string& x() const noexcept { return x_; }
  const std::string& y() const noexcept { return y_; }
  Limits data_limits() const;

  RowSet hit_test_rect(const Rect& rect) const override;
  QueryPayload query_payload(Point pos, const Viewport& viewport) const override;
  std::vector<std::string> bound_columns() const override { return {x_, y_}; }
  Limits home_limits() const override { return data_limits(); }

 protected:
  LayerScene build_layer(std::string_view name) const override;

 private:
  std::string x_, y_;
  mutable GridIndex index_;
  mutable bool index_stale_ = true;
};

class HistogramPlot final : public PlotModel {
 public:
  HistogramPlot(std::string id, std::shared_ptr<Mutaframe> table, std::string var,
                std::optional<double> binwidth = {}, std::optional<double> anchor = {});

  const std::string& var() const noexcept { return var_; }
  const std::vector<double>& breaks() const { return meta().vector("breaks"); }
  double anchor() const { return breaks().front(); }
  double binwidth() const { return breaks()[1] - breaks()[0]; }
  Range data_range() const;
  const std::vector<std::int64_t>& membership() const;
  BinCounts counts() const;

  // Sets `breaks` from (anchor, binwidth) through compute_breaks: one assignment.
  void set_binning(double anchor, double binwidth);

  RowSet hit_test_rect(const Rect& rect) const override;
  QueryPayload query_payload(Point pos, const Viewport& viewport) const override;
  std::vector<std::string> bound_columns() const override { return {var_}; }
  Limits home_limits() const override { return fitted_limits(); }

 protected:
  LayerScene build_layer(std::string_view name) const override;
  std::string default_label(const QueryPayload& payload) const override;

 private:
  void refit_limits_if_escaped();
  Limits fitted_limits() const;

  std::string var_;
  mutable std::vector<std::int64_t> membership_;
  mutable bool membership_stale_ = true;
};

// Bar chart, or spine plot when `spine` is set (equal heights, widths by count).
class BarPlot final : public PlotModel {
 public:
  BarPlot(std::string id, std::shared_ptr<Mutaframe> table, std::string var, bool spine);

  const std::string& var() const noexcept { return var_; }
  bool spine() const noexcept { return kind() == PlotKind::spine; }

  struct Bar {
    std::string level;
    std::size_t count = 0;
    std::size_t brushed = 0;
    Rect bounds;  // main-layer rectangle
  };
  std::vector<Bar> bars() const;

  RowSet hit_test_rect(const Rect& rect) const override;
  QueryPayload query_payload(Point pos, const Viewport& viewport) const override;
  std::vector<std::string> bound_columns() const override { return {var_}; }
  Limits home_limits() const override { return fitted_limits(); }

 protected:
  LayerScene build_layer(std::string_view name) const override;
  std::string default_label(const QueryPayload& payload) const override;

 private:
  Limits fitted_limits() const;

  std::string var_;
};

std::unique_ptr<PlotModel> qscatter(std::string id, std::shared_ptr<Mutaframe> table, std::string x,
                                    std::string y);
std::unique_ptr<PlotModel> qhist(std::string id, std::shared_ptr<Mutaframe> table, std::string var,
                                 std::optional<double> binwidth = {},
                                 std::optional<double> anchor = {});
std::unique_ptr<PlotModel> qbar(std::string id, std::shared_ptr<Mutaframe> table, std::string var,
                                bool spine = false);

}  // namespace lv
