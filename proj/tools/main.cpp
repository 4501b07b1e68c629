#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lv/lv.h"
#include "ws_server.hpp"

namespace {

int report_failure(const char* what) {
  std::cerr << "error: " << what << ": " << lv_last_error() << '\n';
  return 1;
}

int cmd_serve(const std::string& config, int port) {
  if (port < 0) {
    lv_session* probe = nullptr;
    if (lv_session_open(config.c_str(), &probe) != LV_OK) return report_failure("cannot load config");
    const bool has_port = lv_session_port(probe, &port) == LV_OK;
    lv_session_close(probe);
    if (!has_port) {
      std::cerr << "error: no --port given and the config declares none\n";
      return 2;
    }
  }
  try {
    lvtool::WsServer server(config, static_cast<unsigned short>(port), std::cerr);
    std::cerr << "listening on ws://0.0.0.0:" << server.port() << '\n';
    server.run(true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cmd_replay(const std::string& config, const std::string& script, const std::string& out, bool scenes) {
  char* report = nullptr;
  if (lv_replay(config.c_str(), script.c_str(), scenes ? 1 : 0, &report) != LV_OK)
    return report_failure("replay failed");
  std::string text(report);
  lv_string_free(report);

  std::ofstream file(out, std::ios::binary);
  if (!file || !(file << text)) {
    std::cerr << "error: cannot write '" << out << "'\n";
    return 1;
  }
  const auto summary = nlohmann::json::parse(text)["summary"];
  std::cout << "events " << summary["events"] << ", scene diffs " << summary["scene_diffs"]
            << ", p95 latency " << summary["latency_ms"]["p95"] << " ms, digest "
            << summary["digest"].get<std::string>() << '\n';
  return 0;
}

int cmd_bench(std::uint64_t points, std::uint64_t steps, std::uint64_t seed, const std::string& out) {
  char* result = nullptr;
  if (lv_bench(points, steps, seed, &result) != LV_OK) return report_failure("bench failed");
  std::string text(result);
  lv_string_free(result);
  if (!out.empty()) {
    std::ofstream file(out, std::ios::binary);
    if (!file || !(file << text)) {
      std::cerr << "error: cannot write '" << out << "'\n";
      return 1;
    }
  }
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linked interactive plots engine"};
  app.set_version_flag("--version", std::string(lv_version()));
  app.require_subcommand(1);

  std::string config, script, out;
  int port = -1;
  bool scenes = false;
  std::uint64_t points = 0, steps = 0, seed = 1;

  auto* serve = app.add_subcommand("serve", "Run the WebSocket service");
  serve->add_option("--config", config, "Session config (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port; 0 picks a free one")->check(CLI::Range(0, 65535));

  auto* replay = app.add_subcommand("replay", "Run a message script headlessly and write a report");
  replay->add_option("--config", config, "Session config (JSON)")->required()->check(CLI::ExistingFile);
  replay->add_option("--script", script, "Line-delimited JSON messages")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", out, "Report path")->required();
  replay->add_flag("--scenes", scenes, "Embed every emitted scene in the report");

  auto* bench = app.add_subcommand("bench", "Time brush resolution on synthetic points");
  bench->add_option("--points", points, "Number of points")->required()->check(CLI::PositiveNumber);
  bench->add_option("--steps", steps, "Number of random brushes")->required();
  bench->add_option("--seed", seed, "Random seed");
  bench->add_option("--out", out, "Also write the result here");

  CLI11_PARSE(app, argc, argv);

  if (*serve) return cmd_serve(config, port);
  if (*replay) return cmd_replay(config, script, out, scenes);
  return cmd_bench(points, steps, seed, out);
}
