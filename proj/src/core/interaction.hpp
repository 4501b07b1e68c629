#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/geometry.hpp"
#include "core/mutaframe.hpp"
#include "core/plot.hpp"

namespace lv {

// Brushing keeps the rectangle on screen after release; selecting drops it.
enum class SelectionMode { brushing, selecting };

struct BrushState {
  SelectionMode mode = SelectionMode::selecting;
  BrushMode combine = BrushMode::replace;  // used when no modifier is held
  std::optional<Rect> rect;
  bool active = false;
};

enum class CueKind { anchor, binwidth };

struct CueRegion {
  std::string plot_id;
  CueKind kind;
  Rect zone;  // data space
};

enum class EventKind { pointer_down, pointer_move, pointer_up, wheel, key, hover };

std::optional<EventKind> parse_event_kind(std::string_view text);
std::string_view to_string(EventKind kind);
std::string_view to_string(SelectionMode mode);
std::string_view to_string(CueKind kind);

struct Modifiers {
  bool shift = false;  // union
  bool ctrl = false;   // intersect
  bool alt = false;    // toggle
};

struct InputEvent {
  EventKind kind = EventKind::pointer_move;
  Point pos;                   // data space
  std::optional<Point> pixel;  // viewport pixels, origin top-left, when the client sent them
  Viewport viewport;
  double delta = 0;  // wheel steps, positive zooms in
  std::string key;
  Modifiers modifiers;
  int button = 0;  // 0 primary, 1 middle (pans)
};

// Data-space position of a viewport pixel under `limits`.
Point pixel_to_data(Point pixel, const Limits& limits, const Viewport& viewport);

RowSet combine_rows(const RowSet& before, const RowSet& hits, BrushMode mode);

// Scales limits about `center` by 1.25^-delta. Returns false when nothing was assigned.
bool wheel_zoom(PlotModel& plot, Point center, double delta);
// Translates limits by (-dx, -dy): the content follows the pointer.
void pan(PlotModel& plot, double dx, double dy);
// Adjusts anchor or binwidth by a horizontal displacement and writes `breaks` once.
void cue_drag(HistogramPlot& plot, CueKind kind, double dx);
std::vector<CueRegion> cue_regions(const HistogramPlot& plot, const Viewport& viewport);

enum class KeyAction { mode_toggle, clear, cycle_highlight, pan_toggle };

std::map<std::string, KeyAction> default_key_bindings();

// Per-plot input state machine. Each handled event performs at most one
// table assignment and at most one meta assignment on its own.
class InteractionController {
 public:
  explicit InteractionController(PlotModel& plot);
  InteractionController(const InteractionController&) = delete;
  InteractionController& operator=(const InteractionController&) = delete;
  ~InteractionController();

  // Returns a query payload for hover events.
  std::optional<QueryPayload> handle(const InputEvent& event);

  const BrushState& brush() const noexcept { return brush_; }
  void set_selection_mode(SelectionMode mode);
  void set_default_combine(BrushMode mode) { brush_.combine = mode; }
  bool pan_mode() const noexcept { return pan_mode_; }
  void set_pan_mode(bool on) { pan_mode_ = on; }
  std::map<std::string, KeyAction>& key_bindings() noexcept { return keys_; }
  PlotModel& plot() noexcept { return plot_; }

 private:
  enum class Drag { none, select, move_rect, pan, cue };

  void pointer_down(const InputEvent& e);
  void pointer_drag(const InputEvent& e);
  void pointer_up(const InputEvent& e);
  void key(const InputEvent& e);
  void resolve();

  PlotModel& plot_;
  BrushState brush_;
  bool pan_mode_ = false;
  std::map<std::string, KeyAction> keys_;

  Drag drag_ = Drag::none;
  BrushMode drag_combine_ = BrushMode::replace;
  RowSet before_;  // `.brushed` rows when the drag began
  Point down_;
  Point last_;
  std::optional<Point> last_pixel_;
  Rect grabbed_;
  CueKind cue_ = CueKind::anchor;
  ListenerId data_listener_ = 0;
};

// Functional access: paths address a column (including `.brushed` and `.color`)
// of a table, or a meta field of a plot.
void api_set(Mutaframe& table, std::string_view path, const nlohmann::json& value);
nlohmann::json api_get(const Mutaframe& table, std::string_view path);
void api_set(PlotModel& plot, std::string_view path, const nlohmann::json& value);
nlohmann::json api_get(const PlotModel& plot, std::string_view path);

nlohmann::json limits_to_json(const Limits& limits);

}  // namespace lv
