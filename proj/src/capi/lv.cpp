#include "lv/lv.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/replay.hpp"
#include "core/session.hpp"

struct lv_session {
  explicit lv_session(const lv::SessionConfig& config) : port(config.port), impl(config) {}
  std::optional<int> port;
  lv::Session impl;
};

struct lv_table {
  lv::RawTable impl;
};

namespace {

thread_local std::string g_last_error;

lv_status status_of(lv::ErrorCode code) {
  switch (code) {
    case lv::ErrorCode::invalid_argument: return LV_ERR_INVALID_ARGUMENT;
    case lv::ErrorCode::not_found: return LV_ERR_NOT_FOUND;
    case lv::ErrorCode::type_mismatch: return LV_ERR_TYPE_MISMATCH;
    case lv::ErrorCode::out_of_range: return LV_ERR_OUT_OF_RANGE;
    case lv::ErrorCode::parse: return LV_ERR_PARSE;
    case lv::ErrorCode::io: return LV_ERR_IO;
    case lv::ErrorCode::state: return LV_ERR_STATE;
  }
  return LV_ERR_INTERNAL;
}

lv_status fail(lv_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into a status and a thread-local message.
template <class F>
lv_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return LV_OK;
  } catch (const lv::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(LV_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LV_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string join_lines(const std::vector<nlohmann::json>& messages) {
  std::string out;
  for (const auto& m : messages) {
    out += m.dump();
    out += '\n';
  }
  return out;
}

#define LV_REQUIRE(cond, what) \
  if (!(cond)) return fail(LV_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* lv_version(void) { return "0.1.0"; }

const char* lv_status_name(lv_status status) {
  switch (status) {
    case LV_OK: return "ok";
    case LV_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case LV_ERR_NOT_FOUND: return "not_found";
    case LV_ERR_TYPE_MISMATCH: return "type_mismatch";
    case LV_ERR_OUT_OF_RANGE: return "out_of_range";
    case LV_ERR_PARSE: return "parse";
    case LV_ERR_IO: return "io";
    case LV_ERR_STATE: return "state";
    case LV_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lv_last_error(void) { return g_last_error.c_str(); }

void lv_string_free(char* text) { std::free(text); }

lv_status lv_session_open(const char* config_path, lv_session** out) {
  LV_REQUIRE(config_path && out, "config_path and out are required");
  *out = nullptr;
  return guarded([&] { *out = new lv_session(lv::load_config(config_path)); });
}

lv_status lv_session_open_json(const char* config_json, const char* base_dir, lv_session** out) {
  LV_REQUIRE(config_json && out, "config_json and out are required");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw lv::Error(lv::ErrorCode::parse, std::string("config: ") + e.what());
    }
    *out = new lv_session(lv::parse_config(doc, base_dir ? base_dir : ""));
  });
}

void lv_session_close(lv_session* session) { delete session; }

const char* lv_session_id(const lv_session* session) {
  return session ? session->impl.id().c_str() : "";
}

lv_status lv_session_port(const lv_session* session, int* port) {
  LV_REQUIRE(session && port, "session and port are required");
  if (!session->port) return fail(LV_ERR_NOT_FOUND, "config declares no port");
  *port = *session->port;
  g_last_error.clear();
  return LV_OK;
}

lv_status lv_session_connect(lv_session* session, char** replies) {
  LV_REQUIRE(session && replies, "session and replies are required");
  *replies = nullptr;
  return guarded([&] {
    lv::Session::Outcome outcome;
    outcome.full = true;
    outcome.scenes = session->impl.full_scenes();
    *replies = dup_string(join_lines(session->impl.emit(std::move(outcome))));
  });
}

lv_status lv_session_handle(lv_session* session, const char* message, char** replies) {
  LV_REQUIRE(session && message && replies, "session, message and replies are required");
  *replies = nullptr;
  return guarded([&] { *replies = dup_string(join_lines(session->impl.handle_text(message))); });
}

lv_status lv_session_handle_batch(lv_session* session, const char* const* messages, size_t count,
                                  char** replies) {
  LV_REQUIRE(session && replies && (messages || count == 0), "session, messages and replies are required");
  *replies = nullptr;
  return guarded([&] {
    std::vector<nlohmann::json> parsed;
    std::string out;
    // Unparseable entries are answered in place; parsed runs are coalesced.
    auto flush = [&] {
      for (auto& m : lv::Session::coalesce(std::move(parsed))) out += join_lines(session->impl.handle(m));
      parsed.clear();
    };
    for (size_t i = 0; i < count; ++i) {
      if (!messages[i]) throw lv::Error(lv::ErrorCode::invalid_argument, "null message");
      auto m = nlohmann::json::parse(messages[i], nullptr, false);
      if (m.is_discarded()) {
        flush();
        out += join_lines(session->impl.handle_text(messages[i]));
      } else {
        parsed.push_back(std::move(m));
      }
    }
    flush();
    *replies = dup_string(out);
  });
}

lv_status lv_replay(const char* config_path, const char* script_path, int include_scenes, char** report_json) {
  LV_REQUIRE(config_path && script_path && report_json, "config_path, script_path and report_json are required");
  *report_json = nullptr;
  return guarded([&] {
    lv::ReplayOptions options;
    options.include_scenes = include_scenes != 0;
    *report_json = dup_string(lv::replay_files(config_path, script_path, options).dump(2) + "\n");
  });
}

lv_status lv_bench(uint64_t points, uint64_t steps, uint64_t seed, char** result_json) {
  LV_REQUIRE(result_json, "result_json is required");
  *result_json = nullptr;
  return guarded([&] {
    auto r = lv::bench(static_cast<std::size_t>(points), static_cast<std::size_t>(steps), seed);
    *result_json = dup_string(lv::bench_to_json(r).dump(2) + "\n");
  });
}

lv_status lv_table_load_csv(const char* path, lv_table** out) {
  LV_REQUIRE(path && out, "path and out are required");
  *out = nullptr;
  return guarded([&] { *out = new lv_table{lv::load_csv(path)}; });
}

lv_status lv_table_parse_csv(const char* text, lv_table** out) {
  LV_REQUIRE(text && out, "text and out are required");
  *out = nullptr;
  return guarded([&] { *out = new lv_table{lv::parse_csv(text)}; });
}

size_t lv_table_nrow(const lv_table* table) { return table ? table->impl.nrow() : 0; }

size_t lv_table_ncol(const lv_table* table) { return table ? table->impl.columns.size() : 0; }

lv_status lv_table_column_name(const lv_table* table, size_t index, const char** name) {
  LV_REQUIRE(table && name, "table and name are required");
  if (index >= table->impl.columns.size()) return fail(LV_ERR_OUT_OF_RANGE, "column index out of range");
  *name = table->impl.columns[index].name.c_str();
  g_last_error.clear();
  return LV_OK;
}

lv_status lv_table_column_kind(const lv_table* table, size_t index, const char** kind) {
  LV_REQUIRE(table && kind, "table and kind are required");
  if (index >= table->impl.columns.size()) return fail(LV_ERR_OUT_OF_RANGE, "column index out of range");
  *kind = lv::to_string(table->impl.columns[index].kind()).data();
  g_last_error.clear();
  return LV_OK;
}

lv_status lv_table_to_csv(const lv_table* table, char** csv) {
  LV_REQUIRE(table && csv, "table and csv are required");
  *csv = nullptr;
  return guarded([&] { *csv = dup_string(lv::write_csv(table->impl)); });
}

void lv_table_free(lv_table* table) { delete table; }

}  // extern "C"
