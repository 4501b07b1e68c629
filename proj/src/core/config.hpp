#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/column.hpp"
#include "core/link_engine.hpp"
#include "core/scene.hpp"

namespace lv {

struct SyntheticColumn {
  std::string name;
  double min = 0, max = 1;          // numeric: uniform on [min, max)
  std::vector<std::string> levels;  // categorical when nonempty: uniform over levels
};

struct SyntheticSpec {
  std::size_t rows = 0;
  std::uint64_t seed = 0;
  std::vector<SyntheticColumn> columns;
};

struct DataSource {
  std::string id;
  std::optional<std::filesystem::path> csv;  // resolved against the config directory
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::string> view_of;  // subset view of another source
  RowSet rows;                         // for view_of
};

struct PlotSpec {
  std::string id;
  PlotKind kind = PlotKind::scatter;
  std::string table;
  std::string x, y;  // scatter
  std::string var;   // histogram, bar, spine
  std::optional<double> binwidth, anchor;
};

struct SessionConfig {
  std::string session = "session";
  std::optional<int> port;
  std::vector<DataSource> data;
  std::vector<PlotSpec> plots;
  std::vector<LinkSpec> links;
};

SessionConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
SessionConfig load_config(const std::filesystem::path& path);

LinkSpec parse_link(const nlohmann::json& doc);
nlohmann::json link_to_json(const LinkSpec& link);

// Deterministic for a given spec: mt19937_64 with 53-bit uniform doubles.
RawTable synthetic_table(const SyntheticSpec& spec);

}  // namespace lv
