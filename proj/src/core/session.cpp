#include "core/session.hpp"

#include <unordered_map>

#include "core/csv.hpp"

namespace lv {

using nlohmann::json;

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::type_mismatch: return "type_mismatch";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::state: return "state";
  }
  return "internal";
}

json scene_to_json(const SceneDiff& diff) {
  json layers = json::array();
  for (const auto& layer : diff.layers) {
    // Point colors go out as indices into a per-layer palette.
    std::vector<std::string> palette;
    std::unordered_map<std::uint32_t, std::size_t> slot;
    std::vector<std::size_t> color_index;
    color_index.reserve(layer.points.size());
    for (const auto& c : layer.points.color) {
      const std::uint32_t key = (std::uint32_t(c.r) << 24) | (std::uint32_t(c.g) << 16) |
                                (std::uint32_t(c.b) << 8) | c.a;
      auto [it, inserted] = slot.try_emplace(key, palette.size());
      if (inserted) palette.push_back(format_color(c));
      color_index.push_back(it->second);
    }
    json rects = json::array();
    for (const auto& r : layer.rects)
      rects.push_back({{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1},
                       {"color", format_color(r.color)}, {"fill", r.fill}});
    json texts = json::array();
    for (const auto& t : layer.texts) texts.push_back({{"x", t.x}, {"y", t.y}, {"text", t.text}});
    layers.push_back({{"name", layer.name},
                      {"z", layer.z},
                      {"primitives", layer.primitive_count()},
                      {"points", {{"x", layer.points.x}, {"y", layer.points.y},
                                  {"palette", palette}, {"color", color_index}}},
                      {"rects", std::move(rects)},
                      {"texts", std::move(texts)}});
  }
  return {{"plot", diff.plot_id},
          {"kind", to_string(diff.kind)},
          {"full", diff.full},
          {"limits", limits_to_json(diff.limits)},
          {"layers", std::move(layers)}};
}

json query_to_json(const QueryPayload& p) {
  if (p.empty()) return nullptr;
  json out;
  switch (p.kind) {
    case QueryPayload::Kind::bin:
      out = {{"kind", "bin"}, {"lo", p.lo}, {"hi", p.hi}};
      break;
    case QueryPayload::Kind::bar:
      out = {{"kind", "bar"}, {"level", p.level}};
      break;
    case QueryPayload::Kind::point: {
      out = {{"kind", "point"}, {"row", *p.row}};
      json values = json::object();
      for (const auto& [k, v] : p.values) values[k] = v;
      out["values"] = std::move(values);
      break;
    }
    case QueryPayload::Kind::none:
      break;
  }
  if (p.kind != QueryPayload::Kind::point) {
    out["count"] = p.count;
    out["brushed"] = p.brushed;
    out["proportion"] = p.proportion;
  }
  out["label"] = p.label;
  return out;
}

// ---------------------------------------------------------------------------

Session::Session(const SessionConfig& config) : id_(config.session) {
  links_ = std::make_unique<LinkEngine>([this](std::string_view id) { return table(id); });
  for (const auto& src : config.data) {
    std::shared_ptr<Mutaframe> t;
    if (src.csv) {
      t = Mutaframe::augment(src.id, load_csv(*src.csv), clock_);
    } else if (src.synthetic) {
      t = Mutaframe::augment(src.id, synthetic_table(*src.synthetic), clock_);
    } else {
      auto parent = table(*src.view_of);
      if (!parent) throw Error(ErrorCode::not_found, "unknown table '" + *src.view_of + "'");
      t = parent->subset_view(src.id, src.rows);
    }
    tables_.emplace(src.id, t);
    table_order_.push_back(src.id);
  }
  for (const auto& ps : config.plots) {
    auto t = table(ps.table);
    if (!t) throw Error(ErrorCode::not_found, "plot '" + ps.id + "': unknown table '" + ps.table + "'");
    std::unique_ptr<PlotModel> p;
    switch (ps.kind) {
      case PlotKind::scatter: p = qscatter(ps.id, t, ps.x, ps.y); break;
      case PlotKind::histogram: p = qhist(ps.id, t, ps.var, ps.binwidth, ps.anchor); break;
      case PlotKind::bar: p = qbar(ps.id, t, ps.var, false); break;
      case PlotKind::spine: p = qbar(ps.id, t, ps.var, true); break;
    }
    auto& ref = *p;
    plots_.emplace(ps.id, std::move(p));
    plot_order_.push_back(ps.id);
    controllers_.emplace(ps.id, std::make_unique<InteractionController>(ref));
  }
  for (const auto& l : config.links) links_->register_link(l);
  // The initial state is what hello (or a connect) delivers in full; later
  // messages answer with diffs against it.
  full_scenes();
}

std::shared_ptr<Mutaframe> Session::table(std::string_view id) const {
  auto it = tables_.find(id);
  return it == tables_.end() ? nullptr : it->second;
}

PlotModel* Session::plot(std::string_view id) const {
  auto it = plots_.find(id);
  return it == plots_.end() ? nullptr : it->second.get();
}

InteractionController& Session::controller(std::string_view plot_id) {
  auto it = controllers_.find(plot_id);
  if (it == controllers_.end()) throw Error(ErrorCode::not_found, "unknown plot '" + std::string(plot_id) + "'");
  return *it->second;
}

std::vector<SceneDiff> Session::collect_scenes() {
  std::vector<SceneDiff> out;
  for (const auto& id : plot_order_) {
    auto& p = *plots_.find(id)->second;
    if (p.any_dirty()) out.push_back(p.scene());
  }
  return out;
}

std::vector<SceneDiff> Session::full_scenes() {
  std::vector<SceneDiff> out;
  for (const auto& id : plot_order_) out.push_back(plots_.find(id)->second->full_scene());
  return out;
}

json Session::error_reply(ErrorCode code, const std::string& message) const {
  return {{"type", "error"}, {"code", to_string(code)}, {"message", message}};
}

Session::Outcome Session::process(const json& message) {
  Outcome out;
  try {
    if (!message.is_object()) throw Error(ErrorCode::parse, "message must be a JSON object");
    if (!message.contains("seq") || !message["seq"].is_number_integer())
      throw Error(ErrorCode::parse, "message needs an integer 'seq'");
    const auto seq = message["seq"].get<std::int64_t>();
    out.reply_to = seq;
    if (seen_client_seq_ && seq <= last_client_seq_)
      throw Error(ErrorCode::state, "seq " + std::to_string(seq) + " does not follow " +
                                        std::to_string(last_client_seq_));
    if (message.contains("session") && !message["session"].is_null() &&
        message["session"] != json(id_))
      throw Error(ErrorCode::not_found, "no session " + message["session"].dump());
    last_client_seq_ = seq;
    seen_client_seq_ = true;
    apply(message, out);
  } catch (const Error& e) {
    out.replies.push_back(error_reply(e.code(), e.what()));
  } catch (const json::type_error& e) {
    out.replies.push_back(error_reply(ErrorCode::type_mismatch, e.what()));
  } catch (const json::exception& e) {
    out.replies.push_back(error_reply(ErrorCode::parse, e.what()));
  }
  // A failed message may still have mutated state before failing.
  if (!out.full) {
    auto scenes = collect_scenes();
    for (auto& s : scenes) out.scenes.push_back(std::move(s));
  }
  return out;
}

void Session::apply(const json& message, Outcome& out) {
  if (!message.contains("type") || !message["type"].is_string())
    throw Error(ErrorCode::parse, "message needs a string 'type'");
  const auto type = message["type"].get<std::string>();
  if (type == "hello") {
    out.full = true;
    out.scenes = full_scenes();
  } else if (type == "input_event") {
    input_event(message, out);
  } else if (type == "api_set") {
    api_set_message(message);
  } else if (type == "api_get") {
    out.replies.push_back(api_get_message(message));
  } else if (type == "register_link") {
    if (!message.contains("link")) throw Error(ErrorCode::parse, "register_link needs 'link'");
    const auto id = links_->register_link(parse_link(message["link"]));
    out.replies.push_back({{"type", "api_value"},
                           {"target", "links"},
                           {"path", "register_link"},
                           {"value", {{"id", id}, {"link", link_to_json(links_->link(id))}}}});
  } else {
    throw Error(ErrorCode::parse, "unknown message type '" + type + "'");
  }
}

void Session::input_event(const json& m, Outcome& out) {
  const auto plot_id = m.at("plot").get<std::string>();
  auto* p = plot(plot_id);
  if (!p) throw Error(ErrorCode::not_found, "unknown plot '" + plot_id + "'");
  auto& ctrl = controller(plot_id);

  InputEvent e;
  const auto kind = parse_event_kind(m.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::parse, "unknown event kind " + m["kind"].dump());
  e.kind = *kind;
  if (m.contains("viewport")) {
    e.viewport.width = m["viewport"].at("width").get<double>();
    e.viewport.height = m["viewport"].at("height").get<double>();
  }
  if (m.contains("data")) {
    const auto& d = m["data"];
    if (!d.is_array() || d.size() != 2) throw Error(ErrorCode::parse, "'data' must be [x, y]");
    e.pos = {d[0].get<double>(), d[1].get<double>()};
  } else if (m.contains("x") && m.contains("y")) {
    e.pixel = Point{m["x"].get<double>(), m["y"].get<double>()};
    e.pos = pixel_to_data(*e.pixel, p->limits(), e.viewport);
  } else if (e.kind != EventKind::key) {
    throw Error(ErrorCode::parse, "input_event needs pixel 'x','y' or 'data'");
  }
  if (m.contains("modifiers")) {
    for (const auto& mod : m["modifiers"]) {
      const auto s = mod.get<std::string>();
      if (s == "shift") e.modifiers.shift = true;
      else if (s == "ctrl") e.modifiers.ctrl = true;
      else if (s == "alt") e.modifiers.alt = true;
      else throw Error(ErrorCode::parse, "unknown modifier '" + s + "'");
    }
  }
  if (m.contains("button")) e.button = m["button"].get<int>();
  if (m.contains("delta")) e.delta = m["delta"].get<double>();
  if (e.kind == EventKind::key) e.key = m.at("key").get<std::string>();

  auto query = ctrl.handle(e);
  if (e.kind == EventKind::hover)
    out.replies.push_back({{"type", "query_result"}, {"plot", plot_id}, {"result", query_to_json(*query)}});
}

void Session::api_set_message(const json& m) {
  const auto target = m.at("target").get<std::string>();
  const auto path = m.at("path").get<std::string>();
  if (!m.contains("value")) throw Error(ErrorCode::parse, "api_set needs 'value'");
  const auto& value = m["value"];
  if (auto* p = plot(target)) {
    auto& ctrl = controller(target);
    if (path == "selection_mode") {
      const auto s = value.get<std::string>();
      if (s != "brushing" && s != "selecting") throw Error(ErrorCode::invalid_argument, "mode is brushing or selecting");
      ctrl.set_selection_mode(s == "brushing" ? SelectionMode::brushing : SelectionMode::selecting);
    } else if (path == "combine") {
      auto mode = parse_brush_mode(value.get<std::string>());
      if (!mode) throw Error(ErrorCode::invalid_argument, "unknown combine mode");
      ctrl.set_default_combine(*mode);
    } else if (path == "pan_mode") {
      ctrl.set_pan_mode(value.get<bool>());
    } else {
      api_set(*p, path, value);
    }
    return;
  }
  if (auto t = table(target)) return api_set(*t, path, value);
  throw Error(ErrorCode::not_found, "unknown target '" + target + "'");
}

json Session::api_get_message(const json& m) {
  const auto target = m.at("target").get<std::string>();
  const auto path = m.at("path").get<std::string>();
  json value;
  if (auto* p = plot(target)) {
    auto& ctrl = controller(target);
    const auto& b = ctrl.brush();
    if (path == "selection_mode") value = to_string(b.mode);
    else if (path == "combine") value = to_string(b.combine);
    else if (path == "pan_mode") value = ctrl.pan_mode();
    else if (path == "brush_rect")
      value = b.rect ? json{{"x0", b.rect->x0}, {"y0", b.rect->y0}, {"x1", b.rect->x1}, {"y1", b.rect->y1}}
                     : json(nullptr);
    else value = api_get(*p, path);
  } else if (auto t = table(target)) {
    value = api_get(*t, path);
  } else {
    throw Error(ErrorCode::not_found, "unknown target '" + target + "'");
  }
  return {{"type", "api_value"}, {"target", target}, {"path", path}, {"value", std::move(value)}};
}

std::vector<json> Session::emit(Outcome outcome) {
  std::vector<json> out;
  auto envelope = [&](json body) {
    body["session"] = id_;
    body["seq"] = next_seq_++;
    if (outcome.reply_to >= 0) body["reply_to"] = outcome.reply_to;
    out.push_back(std::move(body));
  };
  for (auto& r : outcome.replies) envelope(std::move(r));
  for (const auto& s : outcome.scenes) {
    auto body = scene_to_json(s);
    body["type"] = outcome.full ? "scene_full" : "scene_diff";
    envelope(std::move(body));
  }
  return out;
}

std::vector<json> Session::handle_text(std::string_view text) {
  json message;
  try {
    message = json::parse(text);
  } catch (const json::parse_error& e) {
    Outcome o;
    o.replies.push_back(error_reply(ErrorCode::parse, e.what()));
    return emit(std::move(o));
  }
  return handle(message);
}

std::vector<json> Session::coalesce(std::vector<json> queue) {
  auto is_move = [](const json& m) {
    return m.is_object() && m.value("type", "") == "input_event" && m.value("kind", "") == "pointer_move";
  };
  auto same_stream = [](const json& a, const json& b) {
    return a.value("plot", "") == b.value("plot", "") && a.value("button", 0) == b.value("button", 0) &&
           a.value("modifiers", json::array()) == b.value("modifiers", json::array());
  };
  std::vector<json> out;
  for (auto& m : queue) {
    if (!out.empty() && is_move(m) && is_move(out.back()) && same_stream(m, out.back()))
      out.back() = std::move(m);
    else
      out.push_back(std::move(m));
  }
  return out;
}

}  // namespace lv
