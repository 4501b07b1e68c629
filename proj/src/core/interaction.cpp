#include "core/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "core/error.hpp"

namespace lv {

using nlohmann::json;

std::optional<EventKind> parse_event_kind(std::string_view text) {
  if (text == "pointer_down") return EventKind::pointer_down;
  if (text == "pointer_move") return EventKind::pointer_move;
  if (text == "pointer_up") return EventKind::pointer_up;
  if (text == "wheel") return EventKind::wheel;
  if (text == "key") return EventKind::key;
  if (text == "hover") return EventKind::hover;
  return std::nullopt;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::pointer_down: return "pointer_down";
    case EventKind::pointer_move: return "pointer_move";
    case EventKind::pointer_up: return "pointer_up";
    case EventKind::wheel: return "wheel";
    case EventKind::key: return "key";
    case EventKind::hover: return "hover";
  }
  return "?";
}

std::string_view to_string(SelectionMode mode) {
  return mode == SelectionMode::brushing ? "brushing" : "selecting";
}

std::string_view to_string(CueKind kind) { return kind == CueKind::anchor ? "anchor" : "binwidth"; }

Point pixel_to_data(Point pixel, const Limits& limits, const Viewport& viewport) {
  if (!(viewport.width > 0) || !(viewport.height > 0))
    throw Error(ErrorCode::invalid_argument, "viewport must have positive size");
  return {limits.xmin + pixel.x / viewport.width * limits.width(),
          limits.ymax - pixel.y / viewport.height * limits.height()};
}

RowSet combine_rows(const RowSet& before, const RowSet& hits, BrushMode mode) {
  RowSet out;
  switch (mode) {
    case BrushMode::replace:
      return hits;
    case BrushMode::union_:
      std::set_union(before.begin(), before.end(), hits.begin(), hits.end(), std::back_inserter(out));
      break;
    case BrushMode::intersect:
      std::set_intersection(before.begin(), before.end(), hits.begin(), hits.end(),
                            std::back_inserter(out));
      break;
    case BrushMode::toggle:
      std::set_symmetric_difference(before.begin(), before.end(), hits.begin(), hits.end(),
                                    std::back_inserter(out));
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Meta-only manipulations

namespace {

constexpr double kZoomBase = 1.25;
constexpr double kMinSpanFraction = 1e-9;
constexpr double kCueHalfWidthPx = 6;
constexpr double kCueHeightPx = 14;

// Scales [lo, hi] about c; never narrower than min_span.
std::pair<double, double> scale_axis(double lo, double hi, double c, double f, double min_span) {
  double a = c + (lo - c) * f;
  double b = c + (hi - c) * f;
  if (b - a < min_span) {
    const double mid = c + ((lo + hi) / 2 - c) * f;
    a = mid - min_span / 2;
    b = mid + min_span / 2;
  }
  return {a, b};
}

}  // namespace

bool wheel_zoom(PlotModel& plot, Point center, double delta) {
  if (delta == 0 || !std::isfinite(delta)) return false;
  if (!std::isfinite(center.x) || !std::isfinite(center.y))
    throw Error(ErrorCode::invalid_argument, "zoom center must be finite");
  const auto& lim = plot.limits();
  const auto home = plot.home_limits();
  const double f = std::pow(kZoomBase, -delta);
  auto [x0, x1] = scale_axis(lim.xmin, lim.xmax, center.x, f, kMinSpanFraction * home.width());
  auto [y0, y1] = scale_axis(lim.ymin, lim.ymax, center.y, f, kMinSpanFraction * home.height());
  const Limits next{x0, x1, y0, y1};
  if (!next.valid() || next == lim) return false;
  plot.meta().set_field("limits", next);
  return true;
}

void pan(PlotModel& plot, double dx, double dy) {
  const auto& lim = plot.limits();
  plot.meta().set_field("limits", Limits{lim.xmin - dx, lim.xmax - dx, lim.ymin - dy, lim.ymax - dy});
}

void cue_drag(HistogramPlot& plot, CueKind kind, double dx) {
  if (!std::isfinite(dx)) throw Error(ErrorCode::invalid_argument, "displacement must be finite");
  const auto range = plot.data_range();
  if (range.count == 0) return;
  double anchor = plot.anchor();
  double bw = plot.binwidth();
  if (kind == CueKind::anchor) {
    anchor += dx;
    if (anchor > range.min)
      anchor -= std::ceil((anchor - range.min) / bw) * bw;
    else if (anchor <= range.min - bw)
      anchor += std::floor((range.min - anchor) / bw) * bw;
  } else {
    // The right edge of the first bin follows the pointer: bw * (bw + dx) / bw.
    const double span = range.max - range.min;
    const double floor = (span > 0 ? span : 1.0) / 1000.0;
    bw = std::max(bw * ((bw + dx) / bw), floor);
  }
  plot.set_binning(anchor, bw);
}

std::vector<CueRegion> cue_regions(const HistogramPlot& plot, const Viewport& viewport) {
  const auto& lim = plot.limits();
  const double px = lim.width() / viewport.width;
  const double py = lim.height() / viewport.height;
  const auto& b = plot.breaks();
  auto zone = [&](double x) {
    return Rect{x - kCueHalfWidthPx * px, -kCueHeightPx * py, x + kCueHalfWidthPx * px, 0.0};
  };
  return {{plot.id(), CueKind::anchor, zone(b[0])}, {plot.id(), CueKind::binwidth, zone(b[1])}};
}

std::map<std::string, KeyAction> default_key_bindings() {
  return {{"m", KeyAction::mode_toggle},
          {"Escape", KeyAction::clear},
          {"c", KeyAction::cycle_highlight},
          {"p", KeyAction::pan_toggle}};
}

// ---------------------------------------------------------------------------
// InteractionController

namespace {

constexpr Rgba kHighlightCycle[] = {
    {0xff, 0xd7, 0x00, 0xff},  // gold
    {0xe4, 0x1a, 0x1c, 0xff},  // red
    {0x37, 0x7e, 0xb8, 0xff},  // blue
    {0x4d, 0xaf, 0x4a, 0xff},  // green
    {0x98, 0x4e, 0xa3, 0xff},  // purple
};

std::vector<double> rgba_vector(Rgba c) { return {double(c.r), double(c.g), double(c.b), double(c.a)}; }

BrushMode modifier_mode(const Modifiers& m, BrushMode fallback) {
  if (m.shift) return BrushMode::union_;
  if (m.ctrl) return BrushMode::intersect;
  if (m.alt) return BrushMode::toggle;
  return fallback;
}

}  // namespace

InteractionController::InteractionController(PlotModel& plot) : plot_(plot), keys_(default_key_bindings()) {
  data_listener_ = plot_.table()->add_listener(plot_.bound_columns(), [this](const ChangeNotice&) {
    if (brush_.active && (drag_ == Drag::select || drag_ == Drag::move_rect)) resolve();
  });
}

InteractionController::~InteractionController() {
  try {
    plot_.table()->remove_listener(data_listener_);
  } catch (const Error&) {
  }
}

void InteractionController::set_selection_mode(SelectionMode mode) {
  brush_.mode = mode;
  if (mode == SelectionMode::selecting && !brush_.active) brush_.rect.reset();
}

std::optional<QueryPayload> InteractionController::handle(const InputEvent& e) {
  if (!std::isfinite(e.pos.x) || !std::isfinite(e.pos.y))
    throw Error(ErrorCode::invalid_argument, "event position must be finite");
  switch (e.kind) {
    case EventKind::pointer_down: pointer_down(e); break;
    case EventKind::pointer_move: pointer_drag(e); break;
    case EventKind::pointer_up: pointer_up(e); break;
    case EventKind::wheel: wheel_zoom(plot_, e.pos, e.delta); break;
    case EventKind::key: key(e); break;
    case EventKind::hover: return plot_.query_payload(e.pos, e.viewport);
  }
  return std::nullopt;
}

void InteractionController::pointer_down(const InputEvent& e) {
  down_ = last_ = e.pos;
  last_pixel_ = e.pixel;
  if (pan_mode_ || e.button == 1) {
    drag_ = Drag::pan;
    return;
  }
  if (auto* hist = dynamic_cast<HistogramPlot*>(&plot_)) {
    for (const auto& cue : cue_regions(*hist, e.viewport)) {
      if (cue.zone.contains(e.pos)) {
        drag_ = Drag::cue;
        cue_ = cue.kind;
        return;
      }
    }
  }
  before_ = plot_.table()->brushed_rows();
  drag_combine_ = modifier_mode(e.modifiers, brush_.combine);
  if (brush_.mode == SelectionMode::brushing && brush_.rect && brush_.rect->contains(e.pos)) {
    drag_ = Drag::move_rect;
    grabbed_ = *brush_.rect;
  } else {
    drag_ = Drag::select;
    brush_.rect = Rect::spanning(e.pos, e.pos);
  }
  brush_.active = true;
}

void InteractionController::pointer_drag(const InputEvent& e) {
  switch (drag_) {
    case Drag::none:
      return;
    case Drag::select:
      brush_.rect = Rect::spanning(down_, e.pos);
      resolve();
      break;
    case Drag::move_rect:
      brush_.rect = grabbed_.translated(e.pos.x - down_.x, e.pos.y - down_.y);
      resolve();
      break;
    case Drag::pan: {
      double dx = e.pos.x - last_.x, dy = e.pos.y - last_.y;
      if (e.pixel && last_pixel_) {
        // Pixel deltas are converted at the current scale, which panning keeps fixed.
        const auto& lim = plot_.limits();
        dx = (e.pixel->x - last_pixel_->x) / e.viewport.width * lim.width();
        dy = -(e.pixel->y - last_pixel_->y) / e.viewport.height * lim.height();
      }
      if (dx != 0 || dy != 0) pan(plot_, dx, dy);
      break;
    }
    case Drag::cue:
      if (e.pos.x != last_.x) cue_drag(static_cast<HistogramPlot&>(plot_), cue_, e.pos.x - last_.x);
      break;
  }
  last_ = e.pos;
  last_pixel_ = e.pixel;
}

void InteractionController::pointer_up(const InputEvent& e) {
  if (drag_ == Drag::none) return;
  const bool brushing = drag_ == Drag::select || drag_ == Drag::move_rect;
  if (drag_ == Drag::select && down_ == e.pos && brush_.mode == SelectionMode::brushing) {
    // A click without movement: nothing to select, and there is no rect to keep.
    brush_.rect = Rect::spanning(e.pos, e.pos);
    resolve();
    brush_.rect.reset();
  } else {
    pointer_drag(e);
  }
  if (brushing && brush_.mode == SelectionMode::selecting) brush_.rect.reset();
  brush_.active = false;
  drag_ = Drag::none;
  before_.clear();
}

void InteractionController::resolve() {
  const auto hits = plot_.hit_test_rect(*brush_.rect);
  plot_.table()->set_brushed(combine_rows(before_, hits, drag_combine_), BrushMode::replace);
}

void InteractionController::key(const InputEvent& e) {
  auto it = keys_.find(e.key);
  if (it == keys_.end()) return;
  switch (it->second) {
    case KeyAction::mode_toggle:
      set_selection_mode(brush_.mode == SelectionMode::brushing ? SelectionMode::selecting
                                                                : SelectionMode::brushing);
      break;
    case KeyAction::clear:
      if (!brush_.active) brush_.rect.reset();
      plot_.table()->set_brushed({}, BrushMode::replace);
      break;
    case KeyAction::cycle_highlight: {
      const auto current = plot_.highlight();
      constexpr std::size_t n = std::size(kHighlightCycle);
      std::size_t next = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (kHighlightCycle[i] == current) next = (i + 1) % n;
      plot_.meta().set_field("highlight", rgba_vector(kHighlightCycle[next]));
      break;
    }
    case KeyAction::pan_toggle:
      pan_mode_ = !pan_mode_;
      break;
  }
}

// ---------------------------------------------------------------------------
// Functional access

namespace {

Rgba color_from_json(const json& v) {
  if (!v.is_string()) throw Error(ErrorCode::type_mismatch, "color values must be strings");
  auto c = parse_color(v.get<std::string>());
  if (!c) throw Error(ErrorCode::invalid_argument, "bad color '" + v.get<std::string>() + "'");
  return *c;
}

RowSet rows_from_json(const Mutaframe& table, const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "brushed") return table.brushed_rows();
    if (s == "all") {
      RowSet all(table.nrow());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      return all;
    }
    throw Error(ErrorCode::invalid_argument, "rows must be an index array, \"brushed\" or \"all\"");
  }
  if (!v.is_array()) throw Error(ErrorCode::type_mismatch, "rows must be an array of indices");
  std::vector<RowIndex> rows;
  for (const auto& r : v) {
    if (!r.is_number_integer() || r.get<std::int64_t>() < 0)
      throw Error(ErrorCode::invalid_argument, "row indices must be non-negative integers");
    rows.push_back(r.get<RowIndex>());
  }
  return normalize_rows(std::move(rows));
}

std::vector<double> numbers_from_json(const json& v) {
  if (!v.is_array()) throw Error(ErrorCode::type_mismatch, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (x.is_null())
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    else if (x.is_number())
      out.push_back(x.get<double>());
    else
      throw Error(ErrorCode::type_mismatch, "expected numbers or null");
  }
  return out;
}

Limits limits_from_json(const json& v) {
  if (v.is_array() && v.size() == 4)
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  if (v.is_object())
    return {v.at("xmin").get<double>(), v.at("xmax").get<double>(), v.at("ymin").get<double>(),
            v.at("ymax").get<double>()};
  throw Error(ErrorCode::type_mismatch, "limits must be {xmin,xmax,ymin,ymax} or a 4-array");
}

void set_brushed_json(Mutaframe& table, const json& value) {
  if (value.is_object()) {
    auto mode = BrushMode::replace;
    if (value.contains("mode")) {
      auto m = parse_brush_mode(value["mode"].get<std::string>());
      if (!m) throw Error(ErrorCode::invalid_argument, "unknown brush mode");
      mode = *m;
    }
    table.set_brushed(rows_from_json(table, value.at("rows")), mode);
    return;
  }
  if (!value.is_array()) throw Error(ErrorCode::type_mismatch, ".brushed expects an array or object");
  if (!value.empty() && value.front().is_boolean()) {
    if (value.size() != table.nrow())
      throw Error(ErrorCode::invalid_argument, ".brushed needs one flag per row");
    RowSet rows;
    for (std::size_t i = 0; i < value.size(); ++i)
      if (value[i].get<bool>()) rows.push_back(i);
    table.set_brushed(rows, BrushMode::replace);
    return;
  }
  table.set_brushed(rows_from_json(table, value), BrushMode::replace);
}

void set_color_json(Mutaframe& table, const json& value) {
  const std::string name(kColorColumn);
  if (value.is_object()) {
    auto rows = rows_from_json(table, value.at("rows"));
    std::vector<Rgba> colors;
    if (value.contains("colors")) {
      for (const auto& c : value["colors"]) colors.push_back(color_from_json(c));
    } else {
      colors.assign(rows.size(), color_from_json(value.at("color")));
    }
    table.set_cells(name, rows, colors);
    return;
  }
  if (value.is_string()) {
    table.set_column(name, Column::color(name, std::vector<Rgba>(table.nrow(), color_from_json(value))));
    return;
  }
  if (!value.is_array() || value.size() != table.nrow())
    throw Error(ErrorCode::invalid_argument, ".color needs a color, one color per row, or {rows, color}");
  std::vector<Rgba> colors;
  for (const auto& c : value) colors.push_back(color_from_json(c));
  table.set_column(name, Column::color(name, std::move(colors)));
}

std::vector<std::string> labels_from_json(const json& v, std::vector<std::uint8_t>* missing) {
  if (!v.is_array()) throw Error(ErrorCode::type_mismatch, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (x.is_null() && missing) {
      missing->push_back(1);
      out.emplace_back();
    } else if (x.is_string()) {
      if (missing) missing->push_back(0);
      out.push_back(x.get<std::string>());
    } else {
      throw Error(ErrorCode::type_mismatch, "expected strings");
    }
  }
  return out;
}

void set_data_json(Mutaframe& table, std::string_view path, const json& value) {
  const auto& col = table.column(path);
  const std::string name(path);
  if (value.is_object()) {
    auto rows = rows_from_json(table, value.at("rows"));
    const auto& vals = value.at("values");
    switch (col.kind()) {
      case ColumnKind::numeric: table.set_cells(name, rows, numbers_from_json(vals)); return;
      case ColumnKind::categorical: table.set_cells(name, rows, labels_from_json(vals, nullptr)); return;
      default: throw Error(ErrorCode::type_mismatch, "column '" + name + "' cannot be set this way");
    }
  }
  switch (col.kind()) {
    case ColumnKind::numeric:
      table.set_numeric(name, numbers_from_json(value));
      return;
    case ColumnKind::categorical: {
      std::vector<std::uint8_t> missing;
      auto labels = labels_from_json(value, &missing);
      Categorical cat;
      std::unordered_map<std::string, std::int32_t> index;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (missing[i]) {
          cat.codes.push_back(-1);
          continue;
        }
        auto [it, inserted] = index.try_emplace(labels[i], static_cast<std::int32_t>(cat.levels.size()));
        if (inserted) cat.levels.push_back(labels[i]);
        cat.codes.push_back(it->second);
      }
      table.set_column(name, Column::categorical(name, std::move(cat), std::move(missing)));
      return;
    }
    default:
      throw Error(ErrorCode::type_mismatch, "column '" + name + "' cannot be set this way");
  }
}

}  // namespace

nlohmann::json limits_to_json(const Limits& l) {
  return {{"xmin", l.xmin}, {"xmax", l.xmax}, {"ymin", l.ymin}, {"ymax", l.ymax}};
}

void api_set(Mutaframe& table, std::string_view path, const json& value) {
  if (path == kBrushedColumn) return set_brushed_json(table, value);
  if (path == kColorColumn) return set_color_json(table, value);
  set_data_json(table, path, value);
}

json api_get(const Mutaframe& table, std::string_view path) {
  if (path == "brushed_rows" && !table.has_column(path)) return table.brushed_rows();
  const auto& col = table.column(path);
  json out = json::array();
  switch (col.kind()) {
    case ColumnKind::numeric: {
      auto v = col.as_numeric();
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(col.missing[i] ? json(nullptr) : json(v[i]));
      break;
    }
    case ColumnKind::categorical: {
      const auto& c = col.as_categorical();
      for (std::size_t i = 0; i < c.codes.size(); ++i)
        out.push_back(col.missing[i] ? json(nullptr) : json(c.levels[static_cast<std::size_t>(c.codes[i])]));
      break;
    }
    case ColumnKind::boolean:
      for (auto b : col.as_boolean()) out.push_back(b != 0);
      break;
    case ColumnKind::color:
      for (auto c : col.as_color()) out.push_back(format_color(c));
      break;
  }
  return out;
}

void api_set(PlotModel& plot, std::string_view path, const json& value) {
  auto& meta = plot.meta();
  if (auto* hist = dynamic_cast<HistogramPlot*>(&plot)) {
    if (path == "anchor") return hist->set_binning(value.get<double>(), hist->binwidth());
    if (path == "binwidth") return hist->set_binning(hist->anchor(), value.get<double>());
  }
  if (path == "highlight" && value.is_string())
    return meta.set_field("highlight", rgba_vector(color_from_json(value)));
  if (!meta.has_field(path))
    throw Error(ErrorCode::not_found, "plot '" + plot.id() + "' has no field '" + std::string(path) + "'");
  switch (meta.kind(path)) {
    case FieldKind::scalar:
      if (!value.is_number()) throw Error(ErrorCode::type_mismatch, "expected a number");
      meta.set_field(path, value.get<double>());
      break;
    case FieldKind::vector:
      meta.set_field(path, numbers_from_json(value));
      break;
    case FieldKind::rect:
      meta.set_field(path, limits_from_json(value));
      break;
    case FieldKind::procedure:
      throw Error(ErrorCode::type_mismatch, "procedure fields can only be set through the library");
  }
}

json api_get(const PlotModel& plot, std::string_view path) {
  const auto& meta = plot.meta();
  if (auto* hist = dynamic_cast<const HistogramPlot*>(&plot)) {
    if (path == "anchor") return hist->anchor();
    if (path == "binwidth") return hist->binwidth();
    if (path == "counts") {
      const auto c = hist->counts();
      return {{"count", c.count}, {"brushed", c.brushed}};
    }
  }
  if (!meta.has_field(path))
    throw Error(ErrorCode::not_found, "plot '" + plot.id() + "' has no field '" + std::string(path) + "'");
  switch (meta.kind(path)) {
    case FieldKind::scalar: return meta.scalar(path);
    case FieldKind::vector: return meta.vector(path);
    case FieldKind::rect: return limits_to_json(meta.limits(path));
    case FieldKind::procedure: return static_cast<bool>(meta.procedure(path));
  }
  return nullptr;
}

}  // namespace lv
