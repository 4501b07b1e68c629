#include "core/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace lv {

namespace {

std::vector<double> color_field(Rgba c) {
  return {static_cast<double>(c.r), static_cast<double>(c.g), static_cast<double>(c.b),
          static_cast<double>(c.a)};
}

void require_kind(const Mutaframe& mf, const std::string& name, ColumnKind kind) {
  const auto& col = mf.column(name);
  if (col.kind() != kind)
    throw Error(ErrorCode::type_mismatch, "column '" + name + "' must be " +
                                              std::string(to_string(kind)) + ", is " +
                                              std::string(to_string(col.kind())));
}

std::string cell_text(const Column& col, RowIndex r) {
  if (col.is_missing(r)) return "NA";
  switch (col.kind()) {
    case ColumnKind::numeric: return format_number(col.as_numeric()[r]);
    case ColumnKind::categorical: {
      const auto& cat = col.as_categorical();
      return cat.levels[static_cast<std::size_t>(cat.codes[r])];
    }
    case ColumnKind::boolean: return col.as_boolean()[r] ? "TRUE" : "FALSE";
    case ColumnKind::color: return format_color(col.as_color()[r]);
  }
  return {};
}

}  // namespace

std::string_view to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::scatter: return "scatter";
    case PlotKind::histogram: return "histogram";
    case PlotKind::bar: return "bar";
    case PlotKind::spine: return "spine";
  }
  return "?";
}

const LayerScene* SceneDiff::layer(std::string_view name) const {
  for (const auto& l : layers)
    if (l.name == name) return &l;
  return nullptr;
}

Limits padded_limits(double xmin, double xmax, double ymin, double ymax, double margin) {
  auto pad = [margin](double& lo, double& hi) {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
      return;
    }
    const double d = (hi - lo) * margin;
    lo -= d;
    hi += d;
  };
  pad(xmin, xmax);
  pad(ymin, ymax);
  return {xmin, xmax, ymin, ymax};
}

// ---------------------------------------------------------------------------
// PlotModel

PlotModel::PlotModel(std::string id, PlotKind kind, std::shared_ptr<Mutaframe> table,
                     std::vector<std::pair<std::string, FieldValue>> meta_fields)
    : id_(std::move(id)), kind_(kind), table_(std::move(table)) {
  if (!table_) throw Error(ErrorCode::invalid_argument, "plot '" + id_ + "' has no table");
  meta_fields.emplace_back("highlight", color_field(kDefaultHighlight));
  meta_fields.emplace_back("label", LabelGenerator{});
  meta_ = std::make_shared<MetaObject>(id_, std::move(meta_fields));
  layers_.push_back({std::string(kMainLayer), 0});
  layers_.push_back({std::string(kBrushLayer), 1});
}

PlotModel::~PlotModel() {
  for (auto id : table_listeners_) {
    try {
      table_->remove_listener(id);
    } catch (const Error&) {
    }
  }
}

Rgba PlotModel::highlight() const {
  const auto& v = meta_->vector("highlight");
  auto channel = [&](std::size_t i, double fallback) {
    const double c = i < v.size() ? v[i] : fallback;
    return static_cast<std::uint8_t>(std::clamp(std::lround(c), 0L, 255L));
  };
  return {channel(0, 255), channel(1, 215), channel(2, 0), channel(3, 255)};
}

void PlotModel::watch_table(std::vector<std::string> columns, Listener callback) {
  table_listeners_.push_back(table_->add_listener(std::move(columns), std::move(callback)));
}

void PlotModel::watch_meta(std::string_view field, FieldListener callback) {
  meta_listeners_.push_back(meta_->on_field_changed(field, std::move(callback)));
}

const Layer& PlotModel::layer(std::string_view name) const {
  for (const auto& l : layers_)
    if (l.name == name) return l;
  throw Error(ErrorCode::not_found, "plot '" + id_ + "' has no layer '" + std::string(name) + "'");
}

Layer& PlotModel::layer_mut(std::string_view name) {
  return const_cast<Layer&>(static_cast<const PlotModel&>(*this).layer(name));
}

bool PlotModel::any_dirty() const noexcept {
  return std::any_of(layers_.begin(), layers_.end(), [](const Layer& l) { return l.dirty; });
}

void PlotModel::mark_dirty(std::string_view name) {
  auto& l = layer_mut(name);
  l.dirty = true;
  ++l.dirty_marks;
}

SceneDiff PlotModel::scene() {
  SceneDiff diff{id_, kind_, false, limits(), {}};
  for (auto& l : layers_) {
    if (!l.dirty) continue;
    auto built = build_layer(l.name);
    built.name = l.name;
    built.z = l.z;
    l.emitted_primitives = built.primitive_count();
    l.dirty = false;
    diff.layers.push_back(std::move(built));
  }
  return diff;
}

SceneDiff PlotModel::full_scene() {
  for (auto& l : layers_) l.dirty = true;
  auto diff = scene();
  diff.full = true;
  return diff;
}

QueryPayload PlotModel::labelled(QueryPayload payload) const {
  if (payload.empty()) return payload;
  const auto& gen = meta_->procedure("label");
  payload.label = gen ? gen(payload) : default_label(payload);
  return payload;
}

std::string PlotModel::default_label(const QueryPayload& payload) const {
  std::ostringstream os;
  if (payload.row) os << "row " << *payload.row;
  bool first = true;
  for (const auto& [name, value] : payload.values) {
    os << (first ? ": " : ", ") << name << '=' << value;
    first = false;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// ScatterPlot

ScatterPlot::ScatterPlot(std::string id, std::shared_ptr<Mutaframe> table, std::string x,
                         std::string y)
    : PlotModel(std::move(id), PlotKind::scatter, table, {{"limits", Limits{}}}),
      x_(std::move(x)),
      y_(std::move(y)) {
  require_kind(*table, x_, ColumnKind::numeric);
  require_kind(*table, y_, ColumnKind::numeric);
  meta().set_field("limits", data_limits());

  watch_table({x_, y_, std::string(kColorColumn)}, [this](const ChangeNotice&) { mark_dirty(kMainLayer); });
  watch_table({x_, y_, std::string(kBrushedColumn)}, [this](const ChangeNotice&) { mark_dirty(kBrushLayer); });
  watch_table({x_, y_}, [this](const ChangeNotice&) {
    index_stale_ = true;
    meta().set_field("limits", data_limits());
  });
  watch_meta("limits", [this](const FieldValue&, const FieldValue&) {
    mark_dirty(kMainLayer);
    mark_dirty(kBrushLayer);
  });
  watch_meta("highlight", [this](const FieldValue&, const FieldValue&) { mark_dirty(kBrushLayer); });
}

Limits ScatterPlot::data_limits() const {
  const auto& xc = table()->column(x_);
  const auto& yc = table()->column(y_);
  // Only rows present on both axes are drawn.
  std::vector<std::uint8_t> missing(xc.size());
  for (std::size_t i = 0; i < missing.size(); ++i) missing[i] = xc.missing[i] | yc.missing[i];
  const auto rx = numeric_range(xc.as_numeric(), missing);
  const auto ry = numeric_range(yc.as_numeric(), missing);
  return padded_limits(rx.min, rx.max, ry.min, ry.max);
}

RowSet ScatterPlot::hit_test_rect(const Rect& rect) const {
  if (index_stale_) {
    const auto& xc = table()->column(x_);
    const auto& yc = table()->column(y_);
    index_.build(xc.as_numeric(), yc.as_numeric(), xc.missing, yc.missing);
    index_stale_ = false;
  }
  return index_.query(rect);
}

QueryPayload ScatterPlot::query_payload(Point pos, const Viewport& viewport) const {
  const auto& lim = limits();
  const double rx = kPickRadiusPx * lim.width() / std::max(viewport.width, 1.0);
  const double ry = kPickRadiusPx * lim.height() / std::max(viewport.height, 1.0);
  const auto candidates = hit_test_rect({pos.x - rx, pos.y - ry, pos.x + rx, pos.y + ry});
  const auto xs = table()->column(x_).as_numeric();
  const auto ys = table()->column(y_).as_numeric();
  std::optional<RowIndex> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (auto r : candidates) {
    const double dx = (xs[r] - pos.x) / rx, dy = (ys[r] - pos.y) / ry;
    const double d = dx * dx + dy * dy;
    if (d <= 1.0 && d < best_d) {
      best_d = d;
      best = r;
    }
  }
  if (!best) return {};
  QueryPayload p;
  p.kind = QueryPayload::Kind::point;
  p.row = best;
  p.count = 1;
  p.brushed = table()->brushed()[*best];
  p.proportion = table()->nrow() ? 1.0 / static_cast<double>(table()->nrow()) : 0.0;
  for (const auto& name : table()->column_names()) {
    if (name == kColorColumn) continue;
    p.values.emplace_back(name, cell_text(table()->column(name), *best));
  }
  return labelled(std::move(p));
}

LayerScene ScatterPlot::build_layer(std::string_view name) const {
  LayerScene out;
  const auto& xc = table()->column(x_);
  const auto& yc = table()->column(y_);
  const auto xs = xc.as_numeric();
  const auto ys = yc.as_numeric();
  const auto n = table()->nrow();
  if (name == kMainLayer) {
    const auto colors = table()->colors();
    out.points.x.reserve(n);
    out.points.y.reserve(n);
    out.points.color.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      if (!xc.missing[i] && !yc.missing[i]) out.points.push(xs[i], ys[i], colors[i]);
  } else {
    const auto& brushed = table()->brushed();
    const auto hl = highlight();
    for (std::size_t i = 0; i < n; ++i)
      if (brushed[i] && !xc.missing[i] && !yc.missing[i]) out.points.push(xs[i], ys[i], hl);
  }
  return out;
}

// ---------------------------------------------------------------------------
// HistogramPlot

HistogramPlot::HistogramPlot(std::string id, std::shared_ptr<Mutaframe> table, std::string var,
                             std::optional<double> binwidth, std::optional<double> anchor)
    : PlotModel(std::move(id), PlotKind::histogram, table,
                {{"breaks", std::vector<double>{0, 1}}, {"limits", Limits{}}}),
      var_(std::move(var)) {
  require_kind(*table, var_, ColumnKind::numeric);
  if (binwidth && !(*binwidth > 0))
    throw Error(ErrorCode::invalid_argument, "binwidth must be positive");
  const auto range = data_range();
  const double bw = binwidth.value_or(default_binwidth(range));
  const double a = anchor.value_or(default_anchor(range, bw));
  meta().set_field("breaks", compute_breaks(a, bw, range.min, range.max));
  meta().set_field("limits", fitted_limits());

  watch_table({var_}, [this](const ChangeNotice&) {
    membership_stale_ = true;
    const auto r = data_range();
    const auto& b = breaks();
    if (r.count > 0 && (r.min < b.front() || r.max >= b.back()))
      set_binning(this->anchor(), this->binwidth());
    mark_dirty(kMainLayer);
    mark_dirty(kBrushLayer);
    refit_limits_if_escaped();
  });
  watch_table({std::string(kBrushedColumn)}, [this](const ChangeNotice&) { mark_dirty(kBrushLayer); });
  meta().set_validator("breaks", [](const FieldValue& value) {
    const auto& b = std::get<std::vector<double>>(value);
    bool ok = b.size() >= 2 && std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); });
    for (std::size_t i = 1; ok && i < b.size(); ++i) ok = b[i - 1] < b[i];
    if (!ok) throw Error(ErrorCode::invalid_argument, "breaks must be finite and strictly increasing");
  });
  watch_meta("breaks", [this](const FieldValue&, const FieldValue&) {
    membership_stale_ = true;
    mark_dirty(kMainLayer);
    mark_dirty(kBrushLayer);
    refit_limits_if_escaped();
  });
  watch_meta("limits", [this](const FieldValue&, const FieldValue&) {
    mark_dirty(kMainLayer);
    mark_dirty(kBrushLayer);
  });
  watch_meta("highlight", [this](const FieldValue&, const FieldValue&) { mark_dirty(kBrushLayer); });
}

Range HistogramPlot::data_range() const {
  const auto& col = table()->column(var_);
  return numeric_range(col.as_numeric(), col.missing);
}

const std::vector<std::int64_t>& HistogramPlot::membership() const {
  if (membership_stale_) {
    const auto& col = table()->column(var_);
    membership_ = bin_membership(col.as_numeric(), col.missing, breaks());
    membership_stale_ = false;
  }
  return membership_;
}

BinCounts HistogramPlot::counts() const {
  return count_bins(membership(), breaks().size() - 1, table()->brushed());
}

void HistogramPlot::set_binning(double anchor, double binwidth) {
  const auto r = data_range();
  meta().set_field("breaks", compute_breaks(anchor, binwidth, r.min, r.max));
}

Limits HistogramPlot::fitted_limits() const {
  const auto& b = breaks();
  const auto c = counts();
  const auto top = c.count.empty() ? 0 : *std::max_element(c.count.begin(), c.count.end());
  return padded_limits(b.front(), b.back(), 0.0, top > 0 ? static_cast<double>(top) : 1.0);
}

void HistogramPlot::refit_limits_if_escaped() {
  const auto& lim = limits();
  const auto& b = breaks();
  const auto c = counts();
  const auto top = c.count.empty() ? 0 : *std::max_element(c.count.begin(), c.count.end());
  if (b.front() < lim.xmin || b.back() > lim.xmax || static_cast<double>(top) > lim.ymax)
    meta().set_field("limits", fitted_limits());
}

RowSet HistogramPlot::hit_test_rect(const Rect& rect) const {
  const auto& b = breaks();
  const auto c = counts();
  const std::size_t nb = b.size() - 1;
  std::vector<std::uint8_t> hit(nb, 0);
  bool any = false;
  for (std::size_t i = 0; i < nb; ++i) {
    // Bin extents follow the binning convention: [b_i, b_{i+1}), last bin closed.
    const bool last = i + 1 == nb;
    const bool x_overlap = rect.x1 >= b[i] && (last ? rect.x0 <= b[i + 1] : rect.x0 < b[i + 1]);
    const bool y_overlap = rect.y0 <= static_cast<double>(c.count[i]) && rect.y1 >= 0.0;
    if (x_overlap && y_overlap && c.count[i] > 0) hit[i] = any = true;
  }
  RowSet out;
  if (!any) return out;
  const auto& m = membership();
  for (std::size_t r = 0; r < m.size(); ++r)
    if (m[r] >= 0 && hit[m[r]]) out.push_back(r);
  return out;
}

QueryPayload HistogramPlot::query_payload(Point pos, const Viewport&) const {
  const auto& b = breaks();
  const auto bin = bin_of(pos.x, b);
  if (bin < 0) return {};
  const auto c = counts();
  if (pos.y < 0 || pos.y > static_cast<double>(c.count[bin])) return {};
  std::size_t total = 0;
  for (auto n : c.count) total += n;
  QueryPayload p;
  p.kind = QueryPayload::Kind::bin;
  p.lo = b[bin];
  p.hi = b[bin + 1];
  p.count = c.count[bin];
  p.brushed = c.brushed[bin];
  p.proportion = total ? static_cast<double>(p.count) / static_cast<double>(total) : 0.0;
  return labelled(std::move(p));
}

std::string HistogramPlot::default_label(const QueryPayload& p) const {
  std::ostringstream os;
  os << '[' << format_number(p.lo) << ", " << format_number(p.hi) << "): " << p.count
     << " records, " << p.brushed << " brushed, proportion " << format_number(p.proportion);
  return os.str();
}

LayerScene HistogramPlot::build_layer(std::string_view name) const {
  LayerScene out;
  const auto& b = breaks();
  const auto c = counts();
  const bool main = name == kMainLayer;
  const auto color = main ? kDefaultColor : highlight();
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const auto h = main ? c.count[i] : c.brushed[i];
    const double fill = c.count[i] ? static_cast<double>(c.brushed[i]) / static_cast<double>(c.count[i]) : 0.0;
    out.rects.push_back({b[i], 0.0, b[i + 1], static_cast<double>(h), color, main ? 1.0 : fill});
  }
  return out;
}

// ---------------------------------------------------------------------------
// BarPlot

BarPlot::BarPlot(std::string id, std::shared_ptr<Mutaframe> table, std::string var, bool spine)
    : PlotModel(std::move(id), spine ? PlotKind::spine : PlotKind::bar, table, {{"limits", Limits{}}}),
      var_(std::move(var)) {
  require_kind(*table, var_, ColumnKind::categorical);
  meta().set_field("limits", fitted_limits());
  watch_table({var_}, [this](const ChangeNotice&) {
    mark_dirty(kMainLayer);
    mark_dirty(kBrushLayer);
  });
  watch_table({std::string(kBrushedColumn)}, [this](const ChangeNotice&) { mark_dirty(kBrushLayer); });
  watch_meta("limits", [this](const FieldValue&, const FieldValue&) {
    mark_dirty(kMainLayer);
    mark_dirty(kBrushLayer);
  });
  watch_meta("highlight", [this](const FieldValue&, const FieldValue&) { mark_dirty(kBrushLayer); });
}

std::vector<BarPlot::Bar> BarPlot::bars() const {
  const auto& col = table()->column(var_);
  const auto& cat = col.as_categorical();
  const auto& brushed = table()->brushed();
  std::vector<Bar> out(cat.levels.size());
  std::size_t total = 0;
  for (std::size_t r = 0; r < cat.codes.size(); ++r) {
    if (col.missing[r]) continue;
    auto& bar = out[static_cast<std::size_t>(cat.codes[r])];
    ++bar.count;
    if (brushed[r]) ++bar.brushed;
    ++total;
  }
  double cum = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& bar = out[i];
    bar.level = cat.levels[i];
    if (spine()) {
      const double w = total ? static_cast<double>(bar.count) / static_cast<double>(total) : 0.0;
      bar.bounds = {cum, 0.0, cum + w, 1.0};
      cum += w;
    } else {
      const double x = static_cast<double>(i);
      bar.bounds = {x - 0.4, 0.0, x + 0.4, static_cast<double>(bar.count)};
    }
  }
  return out;
}

Limits BarPlot::fitted_limits() const {
  if (spine()) return padded_limits(0.0, 1.0, 0.0, 1.0);
  const auto bs = bars();
  std::size_t top = 0;
  for (const auto& b : bs) top = std::max(top, b.count);
  const double nlev = static_cast<double>(std::max<std::size_t>(bs.size(), 1));
  return padded_limits(-0.5, nlev - 0.5, 0.0, top ? static_cast<double>(top) : 1.0);
}

RowSet BarPlot::hit_test_rect(const Rect& rect) const {
  const auto bs = bars();
  std::vector<std::uint8_t> hit(bs.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const auto& r = bs[i].bounds;
    if (bs[i].count > 0 && rect.x0 <= r.x1 && rect.x1 >= r.x0 && rect.y0 <= r.y1 && rect.y1 >= r.y0)
      hit[i] = any = true;
  }
  RowSet out;
  if (!any) return out;
  const auto& col = table()->column(var_);
  const auto& cat = col.as_categorical();
  for (std::size_t r = 0; r < cat.codes.size(); ++r)
    if (!col.missing[r] && hit[static_cast<std::size_t>(cat.codes[r])]) out.push_back(r);
  return out;
}

QueryPayload BarPlot::query_payload(Point pos, const Viewport&) const {
  const auto bs = bars();
  std::size_t total = 0;
  for (const auto& b : bs) total += b.count;
  for (const auto& b : bs) {
    if (b.count == 0 || !b.bounds.contains(pos)) continue;
    QueryPayload p;
    p.kind = QueryPayload::Kind::bar;
    p.level = b.level;
    p.count = b.count;
    p.brushed = b.brushed;
    p.proportion = static_cast<double>(b.count) / static_cast<double>(total);
    return labelled(std::move(p));
  }
  return {};
}

std::string BarPlot::default_label(const QueryPayload& p) const {
  std::ostringstream os;
  os << p.level << ": " << p.count << " records, " << p.brushed << " brushed, proportion "
     << format_number(p.proportion);
  return os.str();
}

LayerScene BarPlot::build_layer(std::string_view name) const {
  LayerScene out;
  const bool main = name == kMainLayer;
  const auto hl = highlight();
  for (const auto& b : bars()) {
    const double frac = b.count ? static_cast<double>(b.brushed) / static_cast<double>(b.count) : 0.0;
    if (main) {
      out.rects.push_back({b.bounds.x0, b.bounds.y0, b.bounds.x1, b.bounds.y1, kDefaultColor, 1.0});
    } else {
      const double top = spine() ? frac : static_cast<double>(b.brushed);
      out.rects.push_back({b.bounds.x0, 0.0, b.bounds.x1, top, hl, frac});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<PlotModel> qscatter(std::string id, std::shared_ptr<Mutaframe> table, std::string x,
                                    std::string y) {
  return std::make_unique<ScatterPlot>(std::move(id), std::move(table), std::move(x), std::move(y));
}

std::unique_ptr<PlotModel> qhist(std::string id, std::shared_ptr<Mutaframe> table, std::string var,
                                 std::optional<double> binwidth, std::optional<double> anchor) {
  return std::make_unique<HistogramPlot>(std::move(id), std::move(table), std::move(var), binwidth,
                                         anchor);
}

std::unique_ptr<PlotModel> qbar(std::string id, std::shared_ptr<Mutaframe> table, std::string var,
                                bool spine) {
  return std::make_unique<BarPlot>(std::move(id), std::move(table), std::move(var), spine);
}

}  // namespace lv
