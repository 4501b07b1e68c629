#include "core/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "core/error.hpp"
#include "core/session.hpp"

namespace lv {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json summary_json(const LatencySummary& s) {
  if (s.samples == 0) return {{"samples", 0}, {"p50", nullptr}, {"p95", nullptr}, {"max", nullptr}, {"mean", nullptr}};
  return {{"samples", s.samples}, {"p50", s.p50}, {"p95", s.p95}, {"max", s.max}, {"mean", s.mean}};
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

LatencySummary summarize(std::vector<double> samples) {
  LatencySummary s;
  s.samples = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  auto rank = [&](double p) {
    auto k = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(k, 1, samples.size()) - 1];
  };
  s.p50 = rank(50);
  s.p95 = rank(95);
  s.max = samples.back();
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  return s;
}

json replay(const SessionConfig& config, std::istream& script, ReplayOptions options) {
  std::vector<std::pair<std::size_t, json>> messages;
  std::string line;
  for (std::size_t n = 1; std::getline(script, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      messages.emplace_back(n, json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse, "script line " + std::to_string(n) + ": " + e.what());
    }
  }

  Session session(config);

  auto totals = [&] {
    std::uint64_t inv = 0, tab = 0, met = 0;
    for (const auto& id : session.table_ids()) {
      auto t = session.table(id);
      inv += t->listener_invocations();
      tab += t->assignment_count();
    }
    for (const auto& id : session.plot_ids()) met += session.plot(id)->meta().assignment_count();
    return std::array<std::uint64_t, 3>{inv, tab, met};
  };

  json events = json::array();
  json scenes = json::array();
  std::vector<double> latencies;
  std::size_t main_total = 0, brush_total = 0, diff_total = 0;
  std::uint64_t digest = fnv1a("");

  for (auto& [line_no, message] : messages) {
    const auto before = totals();
    const auto start = Clock::now();
    auto outcome = session.process(message);
    const double ms = elapsed_ms(start);
    const auto after = totals();

    json dirty = json::object();
    for (const auto& s : outcome.scenes) {
      const bool main = s.layer(kMainLayer) != nullptr;
      const bool brush = s.layer(kBrushLayer) != nullptr;
      dirty[s.plot_id] = {{"main", main ? 1 : 0}, {"brush", brush ? 1 : 0}};
      if (!outcome.full) {
        main_total += main;
        brush_total += brush;
      }
    }
    const auto scene_count = outcome.scenes.size();
    const bool full = outcome.full;
    auto emitted = session.emit(std::move(outcome));

    std::uint64_t event_digest = fnv1a("");
    json replies = json::array();
    for (auto& m : emitted) {
      const auto type = m["type"].get<std::string>();
      if (type == "scene_diff" || type == "scene_full") {
        const auto text = m.dump();
        event_digest = fnv1a(text, event_digest);
        digest = fnv1a(text, digest);
        if (options.include_scenes) scenes.push_back(std::move(m));
      } else {
        replies.push_back(std::move(m));
      }
    }
    if (!full) diff_total += scene_count;
    latencies.push_back(ms);
    events.push_back({{"line", line_no},
                      {"type", message.is_object() ? message.value("type", "") : ""},
                      {"seq", message.is_object() && message.contains("seq") ? message["seq"] : json(nullptr)},
                      {"latency_ms", ms},
                      {"scene_messages", scene_count},
                      {"dirty_layers", std::move(dirty)},
                      {"listener_invocations", after[0] - before[0]},
                      {"table_assignments", after[1] - before[1]},
                      {"meta_assignments", after[2] - before[2]},
                      {"digest", hex64(event_digest)},
                      {"replies", std::move(replies)}});
  }

  json report = {{"session", session.id()},
                 {"events", std::move(events)},
                 {"summary",
                  {{"events", messages.size()},
                   {"latency_ms", summary_json(summarize(latencies))},
                   {"scene_diffs", diff_total},
                   {"dirty_layers", {{"main", main_total}, {"brush", brush_total}}},
                   {"digest", hex64(digest)}}}};
  if (options.include_scenes) report["scenes"] = std::move(scenes);
  return report;
}

json replay_files(const std::filesystem::path& config, const std::filesystem::path& script,
                  ReplayOptions options) {
  auto cfg = load_config(config);
  std::ifstream in(script, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open script '" + script.string() + "'");
  return replay(cfg, in, options);
}

BenchResult bench(std::size_t points, std::size_t steps, std::uint64_t seed) {
  if (points < 1) throw Error(ErrorCode::invalid_argument, "bench needs at least one point");
  BenchResult r;
  r.points = points;
  r.steps = steps;
  r.seed = seed;

  SyntheticSpec spec{points, seed, {{"x", 0, 1, {}}, {"y", 0, 1, {}}}};
  auto table = Mutaframe::augment("bench", synthetic_table(spec));
  ScatterPlot plot("bench", table, "x", "y");
  plot.full_scene();

  // The spatial index is built once per data change, not per brush; keep it out of the samples.
  auto start = Clock::now();
  plot.hit_test_rect({0, 0, 0, 0});
  r.index_build_ms = elapsed_ms(start);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t i = 0; i < steps; ++i) {
    const double w = 0.02 + 0.3 * uniform(), h = 0.02 + 0.3 * uniform();
    const double x0 = uniform() * (1 - w), y0 = uniform() * (1 - h);
    const Rect rect{x0, y0, x0 + w, y0 + h};

    start = Clock::now();
    auto hits = plot.hit_test_rect(rect);
    table->set_brushed(hits, BrushMode::replace);
    auto diff = plot.scene();
    r.samples_ms.push_back(elapsed_ms(start));

    r.main_dirty += diff.layer(kMainLayer) != nullptr;
    r.brush_dirty += diff.layer(kBrushLayer) != nullptr;
  }
  r.latency = summarize(r.samples_ms);
  return r;
}

json bench_to_json(const BenchResult& r) {
  return {{"points", r.points},
          {"steps", r.steps},
          {"seed", r.seed},
          {"index_build_ms", r.index_build_ms},
          {"latency_ms", summary_json(r.latency)},
          {"main_layer_dirty", r.main_dirty},
          {"brush_layer_dirty", r.brush_dirty}};
}

}  // namespace lv
