#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"

namespace lv {

struct LatencySummary {
  std::size_t samples = 0;
  double p50 = 0, p95 = 0, max = 0, mean = 0;
};

// Nearest-rank percentiles over milliseconds.
LatencySummary summarize(std::vector<double> samples_ms);

struct ReplayOptions {
  bool include_scenes = false;  // embed every emitted scene message in the report
};

// Runs a line-delimited script of protocol messages against a fresh headless
// session. Blank lines are skipped; a line that is not JSON fails the replay.
nlohmann::json replay(const SessionConfig& config, std::istream& script, ReplayOptions options = {});
nlohmann::json replay_files(const std::filesystem::path& config, const std::filesystem::path& script,
                            ReplayOptions options = {});

struct BenchResult {
  std::size_t points = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  double index_build_ms = 0;
  std::vector<double> samples_ms;
  LatencySummary latency;
  std::size_t main_dirty = 0;   // steps whose scene contained the main layer
  std::size_t brush_dirty = 0;  // steps whose scene contained the brush layer
};

// N uniform points in the unit square, S random brush rectangles; each sample
// times hit test + `.brushed` assignment + listener dispatch + scene diff.
BenchResult bench(std::size_t points, std::size_t steps, std::uint64_t seed = 1);
nlohmann::json bench_to_json(const BenchResult& result);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace lv
