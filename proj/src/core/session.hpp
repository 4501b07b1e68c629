#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/interaction.hpp"
#include "core/link_engine.hpp"
#include "core/mutaframe.hpp"
#include "core/plot.hpp"

namespace lv {

std::string_view to_string(ErrorCode code);

nlohmann::json scene_to_json(const SceneDiff& diff);
nlohmann::json query_to_json(const QueryPayload& payload);

// One client's world: tables, plots, links and the per-plot input state.
// Not thread-safe; a session is driven by a single loop.
class Session {
 public:
  explicit Session(const SessionConfig& config);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }
  std::shared_ptr<Mutaframe> table(std::string_view id) const;
  PlotModel* plot(std::string_view id) const;
  InteractionController& controller(std::string_view plot_id);
  LinkEngine& links() noexcept { return *links_; }
  const std::vector<std::string>& table_ids() const noexcept { return table_order_; }
  const std::vector<std::string>& plot_ids() const noexcept { return plot_order_; }
  const std::shared_ptr<EpochClock>& clock() const noexcept { return clock_; }

  struct Outcome {
    std::int64_t reply_to = -1;
    bool full = false;  // scenes are scene_full messages
    std::vector<SceneDiff> scenes;
    std::vector<nlohmann::json> replies;  // non-scene payloads, envelope added by emit()
  };

  // Applies one client message and computes the resulting scenes.
  Outcome process(const nlohmann::json& message);
  // Wraps an outcome into envelopes carrying the session's outgoing seq.
  std::vector<nlohmann::json> emit(Outcome outcome);
  std::vector<nlohmann::json> handle(const nlohmann::json& message) { return emit(process(message)); }
  // Parses text first; unparseable input yields an error message.
  std::vector<nlohmann::json> handle_text(std::string_view text);

  // Scenes for plots with dirty layers, in plot declaration order.
  std::vector<SceneDiff> collect_scenes();
  std::vector<SceneDiff> full_scenes();

  // Drops pointer moves that are immediately superseded by another move on
  // the same plot with the same buttons and modifiers.
  static std::vector<nlohmann::json> coalesce(std::vector<nlohmann::json> queue);

 private:
  void apply(const nlohmann::json& message, Outcome& out);
  void input_event(const nlohmann::json& message, Outcome& out);
  void api_set_message(const nlohmann::json& message);
  nlohmann::json api_get_message(const nlohmann::json& message);
  nlohmann::json error_reply(ErrorCode code, const std::string& message) const;

  std::string id_;
  std::shared_ptr<EpochClock> clock_ = std::make_shared<EpochClock>();
  std::map<std::string, std::shared_ptr<Mutaframe>, std::less<>> tables_;
  std::vector<std::string> table_order_;
  std::unique_ptr<LinkEngine> links_;
  std::map<std::string, std::unique_ptr<PlotModel>, std::less<>> plots_;
  std::vector<std::string> plot_order_;
  std::map<std::string, std::unique_ptr<InteractionController>, std::less<>> controllers_;

  std::int64_t last_client_seq_ = 0;
  bool seen_client_seq_ = false;
  std::int64_t next_seq_ = 1;
};

}  // namespace lv
