#include "core/config.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace lv {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::parse, "config " + where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto* a : allowed) ok = ok || key == a;
    if (!ok) bad(where, "unknown key '" + key + "'");
  }
}

std::string req_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_string()) bad(where, std::string("'") + key + "' must be a string");
  auto s = obj[key].get<std::string>();
  if (s.empty()) bad(where, std::string("'") + key + "' must not be empty");
  return s;
}

std::optional<double> opt_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_number()) bad(where, std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

// Integers built in C++ are stored signed; parsed text may be either.
bool non_negative(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

SyntheticSpec parse_synthetic(const json& doc, const std::string& where) {
  only_keys(doc, where, {"rows", "seed", "columns"});
  SyntheticSpec s;
  if (!doc.contains("rows") || !non_negative(doc["rows"])) bad(where, "'rows' must be a non-negative integer");
  s.rows = doc["rows"].get<std::size_t>();
  if (doc.contains("seed")) {
    if (!non_negative(doc["seed"])) bad(where, "'seed' must be a non-negative integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  if (!doc.contains("columns") || !doc["columns"].is_array() || doc["columns"].empty())
    bad(where, "'columns' must be a nonempty array");
  for (std::size_t i = 0; i < doc["columns"].size(); ++i) {
    const auto& c = doc["columns"][i];
    const auto cw = where + ".columns[" + std::to_string(i) + "]";
    only_keys(c, cw, {"name", "min", "max", "levels"});
    SyntheticColumn col;
    col.name = req_string(c, "name", cw);
    if (c.contains("levels")) {
      if (!c["levels"].is_array() || c["levels"].empty()) bad(cw, "'levels' must be a nonempty array");
      for (const auto& l : c["levels"]) {
        if (!l.is_string()) bad(cw, "levels must be strings");
        col.levels.push_back(l.get<std::string>());
      }
    } else {
      col.min = opt_number(c, "min", cw).value_or(0.0);
      col.max = opt_number(c, "max", cw).value_or(1.0);
      if (!(col.min <= col.max)) bad(cw, "'min' must not exceed 'max'");
    }
    s.columns.push_back(std::move(col));
  }
  return s;
}

}  // namespace

LinkSpec parse_link(const json& doc) {
  const std::string where = "link";
  only_keys(doc, where, {"kind", "source", "target", "source_key", "target_key", "key", "vars", "k",
                         "metric", "standardize"});
  LinkSpec s;
  auto kind = parse_link_kind(req_string(doc, "kind", where));
  if (!kind) bad(where, "kind must be identity, categorical or knn");
  s.kind = *kind;
  s.source = req_string(doc, "source", where);
  if (doc.contains("target")) s.target = req_string(doc, "target", where);
  if (s.kind == LinkKind::categorical) {
    if (doc.contains("key")) s.source_key = s.target_key = req_string(doc, "key", where);
    if (doc.contains("source_key")) s.source_key = req_string(doc, "source_key", where);
    if (doc.contains("target_key")) s.target_key = req_string(doc, "target_key", where);
    if (s.source_key.empty()) bad(where, "categorical links need 'key' or 'source_key'");
  }
  if (s.kind == LinkKind::knn) {
    if (!doc.contains("vars") || !doc["vars"].is_array()) bad(where, "knn links need 'vars'");
    for (const auto& v : doc["vars"]) {
      if (!v.is_string()) bad(where, "'vars' must be strings");
      s.vars.push_back(v.get<std::string>());
    }
    if (doc.contains("k")) {
      if (!non_negative(doc["k"]) || doc["k"].get<std::int64_t>() == 0) bad(where, "'k' must be a positive integer");
      s.k = doc["k"].get<std::size_t>();
    }
    if (doc.contains("metric")) {
      auto m = parse_metric(req_string(doc, "metric", where));
      if (!m) bad(where, "metric must be euclidean or manhattan");
      s.metric = *m;
    }
    if (doc.contains("standardize")) s.standardize = doc["standardize"].get<bool>();
  }
  return s;
}

json link_to_json(const LinkSpec& s) {
  json out = {{"kind", to_string(s.kind)}, {"source", s.source}, {"target", s.target.empty() ? s.source : s.target}};
  if (s.kind == LinkKind::categorical) {
    out["source_key"] = s.source_key;
    out["target_key"] = s.target_key;
  }
  if (s.kind == LinkKind::knn) {
    out["vars"] = s.vars;
    out["k"] = s.k;
    out["metric"] = to_string(s.metric);
    out["standardize"] = s.standardize;
  }
  return out;
}

SessionConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  only_keys(doc, "root", {"session", "port", "data", "plots", "links"});
  SessionConfig cfg;
  if (doc.contains("session")) cfg.session = req_string(doc, "session", "root");
  if (doc.contains("port")) {
    if (!doc["port"].is_number_integer()) bad("root", "'port' must be an integer");
    cfg.port = doc["port"].get<int>();
    if (*cfg.port < 0 || *cfg.port > 65535) bad("root", "'port' out of range");
  }
  if (!doc.contains("data") || !doc["data"].is_array() || doc["data"].empty())
    bad("root", "'data' must be a nonempty array");

  std::set<std::string> ids;
  auto claim = [&](const std::string& id, const std::string& where) {
    if (!ids.insert(id).second) bad(where, "duplicate id '" + id + "'");
  };

  for (std::size_t i = 0; i < doc["data"].size(); ++i) {
    const auto& d = doc["data"][i];
    const auto where = "data[" + std::to_string(i) + "]";
    only_keys(d, where, {"id", "csv", "synthetic", "view_of", "rows"});
    DataSource src;
    src.id = req_string(d, "id", where);
    claim(src.id, where);
    const int sources = d.contains("csv") + d.contains("synthetic") + d.contains("view_of");
    if (sources != 1) bad(where, "exactly one of 'csv', 'synthetic', 'view_of' is required");
    if (d.contains("csv")) {
      std::filesystem::path p = req_string(d, "csv", where);
      src.csv = p.is_relative() ? base_dir / p : p;
    } else if (d.contains("synthetic")) {
      src.synthetic = parse_synthetic(d["synthetic"], where + ".synthetic");
    } else {
      src.view_of = req_string(d, "view_of", where);
      bool known = false;
      for (const auto& prev : cfg.data) known = known || prev.id == *src.view_of;
      if (!known) bad(where, "'view_of' must name an earlier data source");
      if (!d.contains("rows") || !d["rows"].is_array()) bad(where, "views need 'rows'");
      std::vector<RowIndex> rows;
      for (const auto& r : d["rows"]) {
        if (!non_negative(r)) bad(where, "'rows' must be non-negative integers");
        rows.push_back(r.get<RowIndex>());
      }
      src.rows = normalize_rows(std::move(rows));
    }
    cfg.data.push_back(std::move(src));
  }

  if (doc.contains("plots")) {
    if (!doc["plots"].is_array()) bad("root", "'plots' must be an array");
    for (std::size_t i = 0; i < doc["plots"].size(); ++i) {
      const auto& p = doc["plots"][i];
      const auto where = "plots[" + std::to_string(i) + "]";
      only_keys(p, where, {"id", "kind", "table", "x", "y", "var", "binwidth", "anchor"});
      PlotSpec ps;
      ps.id = req_string(p, "id", where);
      claim(ps.id, where);
      const auto kind = req_string(p, "kind", where);
      ps.table = req_string(p, "table", where);
      bool known = false;
      for (const auto& d : cfg.data) known = known || d.id == ps.table;
      if (!known) bad(where, "unknown table '" + ps.table + "'");
      if (kind == "scatter") {
        ps.kind = PlotKind::scatter;
        ps.x = req_string(p, "x", where);
        ps.y = req_string(p, "y", where);
      } else if (kind == "histogram") {
        ps.kind = PlotKind::histogram;
        ps.var = req_string(p, "var", where);
        ps.binwidth = opt_number(p, "binwidth", where);
        ps.anchor = opt_number(p, "anchor", where);
      } else if (kind == "bar" || kind == "spine") {
        ps.kind = kind == "bar" ? PlotKind::bar : PlotKind::spine;
        ps.var = req_string(p, "var", where);
      } else {
        bad(where, "kind must be scatter, histogram, bar or spine");
      }
      cfg.plots.push_back(std::move(ps));
    }
  }

  if (doc.contains("links")) {
    if (!doc["links"].is_array()) bad("root", "'links' must be an array");
    for (const auto& l : doc["links"]) cfg.links.push_back(parse_link(l));
  }
  return cfg;
}

SessionConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, "config '" + path.string() + "': " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

RawTable synthetic_table(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  RawTable table;
  std::vector<std::vector<double>> numeric(spec.columns.size());
  std::vector<Categorical> cats(spec.columns.size());
  for (std::size_t j = 0; j < spec.columns.size(); ++j) {
    if (spec.columns[j].levels.empty())
      numeric[j].reserve(spec.rows);
    else
      cats[j] = Categorical{spec.columns[j].levels, {}};
  }
  // Row-major draws keep a row's values independent of how many columns follow it.
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t j = 0; j < spec.columns.size(); ++j) {
      const auto& c = spec.columns[j];
      const double u = uniform();
      if (c.levels.empty()) {
        numeric[j].push_back(c.min + u * (c.max - c.min));
      } else {
        auto code = static_cast<std::int32_t>(u * static_cast<double>(c.levels.size()));
        cats[j].codes.push_back(std::min<std::int32_t>(code, static_cast<std::int32_t>(c.levels.size()) - 1));
      }
    }
  }
  for (std::size_t j = 0; j < spec.columns.size(); ++j) {
    const auto& c = spec.columns[j];
    if (c.levels.empty())
      table.columns.push_back(Column::numeric(c.name, std::move(numeric[j])));
    else
      table.columns.push_back(Column::categorical(c.name, std::move(cats[j])));
  }
  return table;
}

}  // namespace lv
