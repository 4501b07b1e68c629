#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/plot.hpp"
#include "oracles.hpp"

using namespace lv;

namespace {

std::shared_ptr<Mutaframe> cars() {
  return Mutaframe::augment("cars", load_csv(std::filesystem::path(LV_TEST_DATA) / "cars.csv"));
}

std::vector<double> column_copy(const Mutaframe& t, const std::string& name) {
  auto v = t.column(name).as_numeric();
  return {v.begin(), v.end()};
}

std::shared_ptr<Mutaframe> categorical_table(const std::vector<std::string>& labels) {
  RawTable t;
  t.columns.push_back(Column::categorical("g", labels));
  std::vector<double> v(labels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
  t.columns.push_back(Column::numeric("v", v));
  return Mutaframe::augment("cat", std::move(t));
}

}  // namespace

TEST(ScatterPlot, InitialSceneHasBothLayers) {
  auto t = cars();
  ScatterPlot p("s", t, "speed", "dist");
  auto full = p.full_scene();
  EXPECT_TRUE(full.full);
  ASSERT_EQ(full.layers.size(), 2u);
  EXPECT_EQ(full.layer(kMainLayer)->points.size(), 50u);
  EXPECT_EQ(full.layer(kBrushLayer)->points.size(), 0u);
  EXPECT_FALSE(p.any_dirty());
  EXPECT_TRUE(p.scene().empty());
}

TEST(ScatterPlot, LimitsPadTheDataRange) {
  auto t = cars();
  ScatterPlot p("s", t, "speed", "dist");
  const auto& l = p.limits();
  EXPECT_NEAR(l.xmin, 4 - 0.04 * 21, 1e-12);
  EXPECT_NEAR(l.xmax, 25 + 0.04 * 21, 1e-12);
  EXPECT_NEAR(l.ymin, 2 - 0.04 * 118, 1e-12);
  EXPECT_NEAR(l.ymax, 120 + 0.04 * 118, 1e-12);
}

TEST(ScatterPlot, BrushingDirtiesOnlyTheBrushLayer) {
  auto t = cars();
  ScatterPlot p("s", t, "speed", "dist");
  p.full_scene();
  t->set_brushed({0, 1, 2, 3}, BrushMode::replace);
  EXPECT_FALSE(p.dirty(kMainLayer));
  EXPECT_TRUE(p.dirty(kBrushLayer));
  auto diff = p.scene();
  ASSERT_EQ(diff.layers.size(), 1u);
  EXPECT_EQ(diff.layers[0].name, kBrushLayer);
  EXPECT_EQ(diff.layers[0].points.size(), 4u);
  EXPECT_EQ(diff.layers[0].points.color[0], kDefaultHighlight);
}

TEST(ScatterPlot, ColorAndLimitsDirtyTheRightLayers) {
  auto t = cars();
  ScatterPlot p("s", t, "speed", "dist");
  p.full_scene();
  t->set_cells(std::string(kColorColumn), {5}, std::vector<Rgba>{{255, 0, 0, 255}});
  EXPECT_TRUE(p.dirty(kMainLayer));
  EXPECT_FALSE(p.dirty(kBrushLayer));
  auto diff = p.scene();
  EXPECT_EQ(diff.layer(kMainLayer)->points.color[5], (Rgba{255, 0, 0, 255}));

  p.meta().set_field("limits", Limits{0, 10, 0, 10});
  EXPECT_TRUE(p.dirty(kMainLayer));
  EXPECT_TRUE(p.dirty(kBrushLayer));
  p.scene();
  p.meta().set_field("highlight", std::vector<double>{255, 0, 0, 255});
  EXPECT_FALSE(p.dirty(kMainLayer));
  EXPECT_TRUE(p.dirty(kBrushLayer));
}

TEST(ScatterPlot, UnrelatedColumnsDoNotDirty) {
  RawTable raw;
  raw.columns.push_back(Column::numeric("a", {1, 2, 3}));
  raw.columns.push_back(Column::numeric("b", {1, 2, 3}));
  raw.columns.push_back(Column::numeric("c", {1, 2, 3}));
  auto t = Mutaframe::augment("t", std::move(raw));
  ScatterPlot p("s", t, "a", "b");
  p.full_scene();
  t->set_numeric("c", {0, 0, 0});
  EXPECT_FALSE(p.any_dirty());
  t->set_numeric("a", {5, 6, 7});
  EXPECT_TRUE(p.dirty(kMainLayer));
  EXPECT_TRUE(p.dirty(kBrushLayer));
  EXPECT_NEAR(p.limits().xmin, 5 - 0.08, 1e-12);
}

TEST(ScatterPlot, HitTestMatchesScanAfterDataChanges) {
  auto t = cars();
  ScatterPlot p("s", t, "speed", "dist");
  std::mt19937_64 rng(8);
  for (int round = 0; round < 5; ++round) {
    auto x = column_copy(*t, "speed");
    auto y = column_copy(*t, "dist");
    for (int q = 0; q < 100; ++q) {
      std::uniform_real_distribution<double> ux(0, 30), uy(-10, 130);
      auto r = Rect::spanning({ux(rng), uy(rng)}, {ux(rng), uy(rng)});
      ASSERT_EQ(p.hit_test_rect(r), oracle::rect_scan(x, y, r.x0, r.y0, r.x1, r.y1));
    }
    for (auto& v : x) v += 1.5;
    t->set_numeric("speed", x);
  }
}

TEST(ScatterPlot, RequiresNumericColumns) {
  auto t = categorical_table({"a", "b"});
  EXPECT_THROW(ScatterPlot("s", t, "g", "v"), Error);
  EXPECT_THROW(ScatterPlot("s", t, "v", "nope"), Error);
}

TEST(ScatterPlot, QueryFindsNearestPointWithinPickRadius) {
  auto t = cars();
  ScatterPlot p("s", t, "speed", "dist");
  Viewport vp{640, 480};
  auto q = p.query_payload({24, 120}, vp);
  ASSERT_EQ(q.kind, QueryPayload::Kind::point);
  EXPECT_EQ(*q.row, 48u);
  EXPECT_NE(q.label.find("dist=120"), std::string::npos);
  // 8 px is about a quarter unit of speed at this scale; one unit away misses.
  EXPECT_TRUE(p.query_payload({23, 120}, vp).empty());
}

TEST(ScatterPlot, CustomLabelGenerator) {
  auto t = cars();
  ScatterPlot p("s", t, "speed", "dist");
  p.meta().set_field("label", LabelGenerator([](const QueryPayload& q) { return "car " + std::to_string(*q.row + 1); }));
  EXPECT_EQ(p.query_payload({24, 120}, {}).label, "car 49");
}

TEST(ScatterPlot, DestructionRemovesListeners) {
  auto t = cars();
  const auto before = t->listener_count();
  {
    ScatterPlot p("s", t, "speed", "dist");
    EXPECT_GT(t->listener_count(), before);
  }
  EXPECT_EQ(t->listener_count(), before);
  t->set_brushed({1}, BrushMode::replace);
}

// ---------------------------------------------------------------------------

TEST(HistogramPlot, BreaksFromBinwidthAndAnchor) {
  auto t = cars();
  HistogramPlot h("h", t, "dist", 10.0, 0.0);
  EXPECT_EQ(h.breaks().front(), 0);
  EXPECT_EQ(h.breaks().back(), 130);
  EXPECT_EQ(h.binwidth(), 10);
  auto c = h.counts();
  EXPECT_EQ(c.count, oracle::linear_counts(column_copy(*t, "dist"), h.breaks()));
}

TEST(HistogramPlot, DefaultBinningCoversData) {
  auto t = cars();
  HistogramPlot h("h", t, "dist");
  EXPECT_LE(h.breaks().front(), 2);
  EXPECT_GT(h.breaks().back(), 120);
  std::size_t total = 0;
  for (auto n : h.counts().count) total += n;
  EXPECT_EQ(total, 50u);
}

TEST(HistogramPlot, BrushLayerSuperimposesBrushedCounts) {
  auto t = cars();
  HistogramPlot h("h", t, "dist", 10.0, 0.0);
  h.full_scene();
  t->set_brushed({0, 1, 2, 3}, BrushMode::replace);  // dist 2, 10, 4, 22
  EXPECT_FALSE(h.dirty(kMainLayer));
  auto diff = h.scene();
  ASSERT_EQ(diff.layers.size(), 1u);
  const auto& rects = diff.layers[0].rects;
  ASSERT_EQ(rects.size(), h.breaks().size() - 1);
  const auto counts = h.counts();
  EXPECT_EQ(rects[0].y1, 2);  // 2 and 4
  EXPECT_EQ(rects[1].y1, 1);  // 10
  EXPECT_EQ(rects[2].y1, 1);  // 22
  EXPECT_DOUBLE_EQ(rects[0].fill, 2.0 / double(counts.count[0]));
  for (std::size_t i = 3; i < rects.size(); ++i) EXPECT_EQ(rects[i].y1, 0);
}

TEST(HistogramPlot, HitTestSelectsWholeBins) {
  auto t = cars();
  HistogramPlot h("h", t, "dist", 10.0, 0.0);
  const auto dist = column_copy(*t, "dist");
  // x >= 50 over all heights: every row in a bin starting at or after 50.
  auto rows = h.hit_test_rect({50, 0, 1000, 1000});
  oracle::Rows expected;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (h.breaks()[oracle::linear_bin(dist[i], h.breaks())] >= 50) expected.push_back(i);
  EXPECT_EQ(rows, expected);
  // Above every bar: nothing.
  EXPECT_TRUE(h.hit_test_rect({0, 100, 200, 200}).empty());
}

TEST(HistogramPlot, BreaksValidatorRejectsNonIncreasing) {
  auto t = cars();
  HistogramPlot h("h", t, "dist", 10.0, 0.0);
  EXPECT_THROW(h.meta().set_field("breaks", std::vector<double>{0, 0, 1}), Error);
  EXPECT_THROW(h.meta().set_field("breaks", std::vector<double>{0}), Error);
  EXPECT_EQ(h.binwidth(), 10);
}

TEST(HistogramPlot, CustomBreaksStillCountEverything) {
  auto t = cars();
  HistogramPlot h("h", t, "dist", 10.0, 0.0);
  h.meta().set_field("breaks", std::vector<double>{0, 50, 200});
  EXPECT_EQ(h.counts().count, (std::vector<std::size_t>{32, 18}));
  EXPECT_GE(h.limits().ymax, 32);  // refit because the bars escaped
}

TEST(HistogramPlot, DataChangesRebinWhenOutOfCoverage) {
  auto t = cars();
  HistogramPlot h("h", t, "dist", 10.0, 0.0);
  auto dist = column_copy(*t, "dist");
  dist[0] = 500;
  t->set_numeric("dist", dist);
  EXPECT_GT(h.breaks().back(), 500);
  EXPECT_EQ(h.binwidth(), 10);
  std::size_t total = 0;
  for (auto n : h.counts().count) total += n;
  EXPECT_EQ(total, 50u);
  EXPECT_GE(h.limits().xmax, h.breaks().back());
}

TEST(HistogramPlot, QueryReportsBinDetails) {
  auto t = cars();
  HistogramPlot h("h", t, "dist", 10.0, 0.0);
  t->set_brushed({0}, BrushMode::replace);
  auto q = h.query_payload({5, 1}, {});
  ASSERT_EQ(q.kind, QueryPayload::Kind::bin);
  EXPECT_EQ(q.lo, 0);
  EXPECT_EQ(q.hi, 10);
  EXPECT_EQ(q.count, 2u);
  EXPECT_EQ(q.brushed, 1u);
  EXPECT_DOUBLE_EQ(q.proportion, 2.0 / 50);
  EXPECT_EQ(q.label, "[0, 10): 2 records, 1 brushed, proportion 0.04");
  EXPECT_TRUE(h.query_payload({5, 3}, {}).empty());  // above the bar
}

// ---------------------------------------------------------------------------

TEST(BarPlot, CountsAndQuery) {
  auto t = categorical_table({"a", "b", "a", "c", "a", "b"});
  BarPlot b("b", t, "g", false);
  auto bars = b.bars();
  ASSERT_EQ(bars.size(), 3u);
  EXPECT_EQ(bars[0].count, 3u);
  EXPECT_EQ(bars[1].count, 2u);
  t->set_brushed({0, 1}, BrushMode::replace);
  auto q = b.query_payload({0, 1}, {});
  ASSERT_EQ(q.kind, QueryPayload::Kind::bar);
  EXPECT_EQ(q.level, "a");
  EXPECT_EQ(q.count, 3u);
  EXPECT_EQ(q.brushed, 1u);
  EXPECT_DOUBLE_EQ(q.proportion, 0.5);
  EXPECT_TRUE(b.query_payload({0.5, 1}, {}).empty());  // gap between bars
}

TEST(BarPlot, HitTestSelectsWholeCategories) {
  auto t = categorical_table({"a", "b", "a", "c", "a", "b"});
  BarPlot b("b", t, "g", false);
  EXPECT_EQ(b.hit_test_rect({0.9, 0, 1.1, 0.5}), (RowSet{1, 5}));
  EXPECT_EQ(b.hit_test_rect({-1, 0, 5, 0}), (RowSet{0, 1, 2, 3, 4, 5}));
  EXPECT_TRUE(b.hit_test_rect({0, 3.5, 5, 9}).empty());
}

TEST(BarPlot, SpineWidthsAreProportional) {
  auto t = categorical_table({"a", "b", "a", "c", "a", "b"});
  BarPlot s("s", t, "g", true);
  auto bars = s.bars();
  EXPECT_DOUBLE_EQ(bars[0].bounds.x1 - bars[0].bounds.x0, 0.5);
  EXPECT_DOUBLE_EQ(bars[2].bounds.x1, 1.0);
  t->set_brushed({0, 2}, BrushMode::replace);
  auto diff = s.full_scene();
  const auto* brush = diff.layer(kBrushLayer);
  EXPECT_DOUBLE_EQ(brush->rects[0].y1, 2.0 / 3.0);
  EXPECT_EQ(s.kind(), PlotKind::spine);
}

TEST(BarPlot, RequiresCategoricalColumn) {
  auto t = cars();
  EXPECT_THROW(BarPlot("b", t, "speed", false), Error);
}
