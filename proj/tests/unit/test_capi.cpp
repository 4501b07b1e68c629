#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "lv/lv.h"

using nlohmann::json;

namespace {

const std::string kData = LV_TEST_DATA;

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s ? s : "";
  lv_string_free(s);
  return out;
}

std::vector<json> lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

struct SessionGuard {
  lv_session* s = nullptr;
  ~SessionGuard() { lv_session_close(s); }
};

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(lv_version(), "");
  EXPECT_STREQ(lv_status_name(LV_OK), "ok");
  EXPECT_STREQ(lv_status_name(LV_ERR_PARSE), "parse");
  EXPECT_STREQ(lv_status_name(static_cast<lv_status>(1234)), "unknown");
}

TEST(CApi, SessionLifecycle) {
  SessionGuard g;
  ASSERT_EQ(lv_session_open((kData + "/cars.json").c_str(), &g.s), LV_OK) << lv_last_error();
  EXPECT_STREQ(lv_session_id(g.s), "cars");
  int port = 0;
  EXPECT_EQ(lv_session_port(g.s, &port), LV_ERR_NOT_FOUND);

  char* out = nullptr;
  ASSERT_EQ(lv_session_connect(g.s, &out), LV_OK);
  auto scenes = lines(take(out));
  ASSERT_EQ(scenes.size(), 2u);
  EXPECT_EQ(scenes[0]["type"], "scene_full");

  ASSERT_EQ(lv_session_handle(g.s, R"({"type":"input_event","seq":1,"plot":"scatter","kind":"pointer_down","data":[3.5,0]})", &out), LV_OK);
  EXPECT_TRUE(lines(take(out)).empty());
  ASSERT_EQ(lv_session_handle(g.s, R"({"type":"input_event","seq":2,"plot":"scatter","kind":"pointer_move","data":[7.5,23]})", &out), LV_OK);
  EXPECT_EQ(lines(take(out)).size(), 2u);
  ASSERT_EQ(lv_session_handle(g.s, R"({"type":"api_get","seq":3,"target":"cars","path":"brushed_rows"})", &out), LV_OK);
  auto reply = lines(take(out));
  ASSERT_EQ(reply.size(), 1u);
  EXPECT_EQ(reply[0]["value"], json::array({0, 1, 2, 3}));
}

TEST(CApi, ProtocolErrorsAreRepliesNotStatuses) {
  SessionGuard g;
  ASSERT_EQ(lv_session_open((kData + "/cars.json").c_str(), &g.s), LV_OK);
  char* out = nullptr;
  ASSERT_EQ(lv_session_handle(g.s, "garbage", &out), LV_OK);
  auto r = lines(take(out));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0]["type"], "error");
}

TEST(CApi, BatchCoalescesMoves) {
  SessionGuard g;
  ASSERT_EQ(lv_session_open((kData + "/cars.json").c_str(), &g.s), LV_OK);
  const char* msgs[] = {
      R"({"type":"input_event","seq":1,"plot":"scatter","kind":"pointer_down","data":[3.5,0]})",
      R"({"type":"input_event","seq":2,"plot":"scatter","kind":"pointer_move","data":[30,200]})",
      R"({"type":"input_event","seq":3,"plot":"scatter","kind":"pointer_move","data":[7.5,23]})",
      "not json",
      R"({"type":"api_get","seq":4,"target":"cars","path":"brushed_rows"})",
  };
  char* out = nullptr;
  ASSERT_EQ(lv_session_handle_batch(g.s, msgs, 5, &out), LV_OK);
  auto r = lines(take(out));
  int diffs = 0, errors = 0;
  for (const auto& m : r) {
    diffs += m["type"] == "scene_diff";
    errors += m["type"] == "error";
  }
  EXPECT_EQ(diffs, 2);  // one surviving move, both plots
  EXPECT_EQ(errors, 1);
  EXPECT_EQ(r.back()["value"], json::array({0, 1, 2, 3}));
  EXPECT_EQ(lv_session_handle_batch(g.s, nullptr, 0, &out), LV_OK);
  EXPECT_EQ(take(out), "");
}

TEST(CApi, OpenErrorsCarryAStatusAndMessage) {
  lv_session* s = nullptr;
  EXPECT_EQ(lv_session_open("/nonexistent/config.json", &s), LV_ERR_IO);
  EXPECT_EQ(s, nullptr);
  EXPECT_NE(std::string(lv_last_error()).find("config"), std::string::npos);
  EXPECT_EQ(lv_session_open_json("{\"data\":[]}", nullptr, &s), LV_ERR_PARSE);
  EXPECT_EQ(lv_session_open_json("{", nullptr, &s), LV_ERR_PARSE);
  EXPECT_EQ(lv_session_open(nullptr, &s), LV_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(lv_session_open_json(R"({"data":[{"id":"t","synthetic":{"rows":5,"columns":[{"name":"x"}]}}],"port":9001})",
                                 nullptr, &s),
            LV_OK);
  EXPECT_STREQ(lv_last_error(), "");
  int port = 0;
  EXPECT_EQ(lv_session_port(s, &port), LV_OK);
  EXPECT_EQ(port, 9001);
  lv_session_close(s);
  lv_session_close(nullptr);
}

TEST(CApi, ReplayAndBench) {
  char* out = nullptr;
  ASSERT_EQ(lv_replay((kData + "/cars.json").c_str(), (kData + "/cars_brush.jsonl").c_str(), 0, &out), LV_OK)
      << lv_last_error();
  auto report = json::parse(take(out));
  EXPECT_EQ(report["summary"]["events"], 11);
  EXPECT_EQ(lv_replay((kData + "/cars.json").c_str(), "/nonexistent.jsonl", 0, &out), LV_ERR_IO);
  EXPECT_EQ(out, nullptr);

  ASSERT_EQ(lv_bench(500, 5, 1, &out), LV_OK);
  auto b = json::parse(take(out));
  EXPECT_EQ(b["steps"], 5);
  EXPECT_EQ(lv_bench(0, 5, 1, &out), LV_ERR_INVALID_ARGUMENT);
}

TEST(CApi, Tables) {
  lv_table* t = nullptr;
  ASSERT_EQ(lv_table_parse_csv("a,b\n1,x\n2,y\n", &t), LV_OK);
  EXPECT_EQ(lv_table_nrow(t), 2u);
  EXPECT_EQ(lv_table_ncol(t), 2u);
  const char* name = nullptr;
  const char* kind = nullptr;
  ASSERT_EQ(lv_table_column_name(t, 1, &name), LV_OK);
  EXPECT_STREQ(name, "b");
  ASSERT_EQ(lv_table_column_kind(t, 1, &kind), LV_OK);
  EXPECT_STREQ(kind, "categorical");
  EXPECT_EQ(lv_table_column_name(t, 2, &name), LV_ERR_OUT_OF_RANGE);
  char* csv = nullptr;
  ASSERT_EQ(lv_table_to_csv(t, &csv), LV_OK);
  EXPECT_EQ(take(csv), "a,b\n1,x\n2,y\n");
  lv_table_free(t);

  EXPECT_EQ(lv_table_parse_csv("a,b\n1\n", &t), LV_ERR_PARSE);
  EXPECT_EQ(lv_table_load_csv("/nonexistent.csv", &t), LV_ERR_IO);
  ASSERT_EQ(lv_table_load_csv((kData + "/cars.csv").c_str(), &t), LV_OK);
  EXPECT_EQ(lv_table_nrow(t), 50u);
  lv_table_free(t);
  lv_table_free(nullptr);
}
