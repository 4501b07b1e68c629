#include <gtest/gtest.h>

#include <map>
#include <random>

#include "core/error.hpp"
#include "core/link_engine.hpp"
#include "core/plot.hpp"
#include "oracles.hpp"

using namespace lv;

namespace {

// A small registry standing in for a session's table map.
struct World {
  std::shared_ptr<EpochClock> clock = std::make_shared<EpochClock>();
  std::map<std::string, std::shared_ptr<Mutaframe>, std::less<>> tables;
  LinkEngine engine{[this](std::string_view id) -> std::shared_ptr<Mutaframe> {
    auto it = tables.find(id);
    return it == tables.end() ? nullptr : it->second;
  }};

  std::shared_ptr<Mutaframe> add(const std::string& id, RawTable raw) {
    auto t = Mutaframe::augment(id, std::move(raw), clock);
    tables[id] = t;
    return t;
  }
};

std::vector<std::string> random_labels(std::mt19937_64& rng, std::size_t n, std::size_t levels) {
  std::vector<std::string> out(n);
  for (auto& s : out) s = "L" + std::to_string(rng() % levels);
  return out;
}

RawTable labelled(const std::vector<std::string>& labels, const std::string& key = "g") {
  RawTable t;
  t.columns.push_back(Column::categorical(key, labels));
  return t;
}

LinkSpec categorical(std::string source, std::string target, std::string key = "g") {
  LinkSpec s;
  s.kind = LinkKind::categorical;
  s.source = std::move(source);
  s.target = std::move(target);
  s.source_key = s.target_key = std::move(key);
  return s;
}

LinkSpec knn_link(std::string source, std::string target, std::vector<std::string> vars, std::size_t k) {
  LinkSpec s;
  s.kind = LinkKind::knn;
  s.source = std::move(source);
  s.target = std::move(target);
  s.vars = std::move(vars);
  s.k = k;
  return s;
}

LinkSpec identity(std::string source, std::string target) {
  LinkSpec s;
  s.source = std::move(source);
  s.target = std::move(target);
  return s;
}

oracle::Rows random_subset(std::mt19937_64& rng, std::size_t n, double p) {
  oracle::Rows out;
  std::bernoulli_distribution pick(p);
  for (std::size_t i = 0; i < n; ++i)
    if (pick(rng)) out.push_back(i);
  return out;
}

std::vector<double> standardized(std::vector<double> v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / double(v.size() - 1));
  for (auto& x : v) x /= sd;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Resolution functions against brute force

TEST(Categorical, SelfLinkClosureMatchesOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 150;
    auto labels = random_labels(rng, n, 1 + rng() % 12);
    auto t = Mutaframe::augment("t", labelled(labels));
    auto seed = random_subset(rng, n, 0.1);
    auto got = resolve_categorical(*t, "g", seed);
    ASSERT_EQ(got, oracle::same_category(labels, seed));
    // Closed under itself.
    ASSERT_EQ(resolve_categorical(*t, "g", got), got);
  }
}

TEST(Categorical, MissingKeysNeverMatchButSeedsStay) {
  Categorical cat{{"a", "b"}, {0, -1, 0, 1, -1}};
  RawTable raw;
  raw.columns.push_back(Column::categorical("g", cat, {0, 1, 0, 0, 1}));
  auto t = Mutaframe::augment("t", std::move(raw));
  EXPECT_EQ(resolve_categorical(*t, "g", {1}), RowSet{1});
  EXPECT_EQ(resolve_categorical(*t, "g", {0}), (RowSet{0, 2}));
  EXPECT_EQ(resolve_categorical(*t, "g", {1, 3}), (RowSet{1, 3}));
}

TEST(Knn, MatchesBruteForceAcrossMetricsAndK) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 7 + rng() % 194;
    const std::size_t dims = 1 + rng() % 3;
    RawTable raw;
    std::vector<std::vector<double>> cols;
    std::vector<std::string> vars;
    for (std::size_t d = 0; d < dims; ++d) {
      cols.push_back(oracle::uniform(rng, n, -10.0 * double(d + 1), 10.0 * double(d + 1)));
      vars.push_back("v" + std::to_string(d));
      raw.columns.push_back(Column::numeric(vars.back(), cols.back()));
    }
    auto t = Mutaframe::augment("t", std::move(raw));
    auto seed = random_subset(rng, n, 0.05);
    const bool standardize = trial % 3 == 0;
    auto oracle_cols = cols;
    if (standardize)
      for (auto& c : oracle_cols) c = standardized(c);
    for (std::size_t k = 1; k <= 5; ++k) {
      for (auto metric : {Metric::euclidean, Metric::manhattan}) {
        auto got = resolve_knn(*t, vars, k, metric, seed, standardize);
        ASSERT_EQ(got, oracle::knn(oracle_cols, k, metric == Metric::manhattan, seed))
            << "trial " << trial << " k " << k;
      }
    }
  }
}

TEST(Knn, TiesGoToTheLowerRow) {
  // Row 2 sits at distance 1 from both rows 1 and 3.
  RawTable raw;
  raw.columns.push_back(Column::numeric("x", {0, 1, 2, 3, 10}));
  auto t = Mutaframe::augment("t", std::move(raw));
  EXPECT_EQ(resolve_knn(*t, {"x"}, 1, Metric::euclidean, {2}), (RowSet{1, 2}));
  EXPECT_EQ(resolve_knn(*t, {"x"}, 2, Metric::manhattan, {2}), (RowSet{1, 2, 3}));
  std::vector<std::vector<double>> cols{{0, 1, 2, 3, 10}};
  EXPECT_EQ(resolve_knn(*t, {"x"}, 3, Metric::euclidean, {2, 4}), oracle::knn(cols, 3, false, {2, 4}));
}

TEST(Knn, MissingValuesAreNeverNeighbours) {
  RawTable raw;
  raw.columns.push_back(Column::numeric("x", {0, 0.5, 1, 5}, {0, 1, 0, 0}));
  auto t = Mutaframe::augment("t", std::move(raw));
  EXPECT_EQ(resolve_knn(*t, {"x"}, 1, Metric::euclidean, {0}), (RowSet{0, 2}));
  EXPECT_EQ(resolve_knn(*t, {"x"}, 1, Metric::euclidean, {1}), RowSet{1});
}

TEST(Knn, RejectsBadK) {
  RawTable raw;
  raw.columns.push_back(Column::numeric("x", {0, 1, 2}));
  auto t = Mutaframe::augment("t", std::move(raw));
  EXPECT_THROW(resolve_knn(*t, {"x"}, 0, Metric::euclidean, {0}), Error);
  EXPECT_THROW(resolve_knn(*t, {"x"}, 3, Metric::euclidean, {0}), Error);
  EXPECT_THROW(resolve_knn(*t, {}, 1, Metric::euclidean, {0}), Error);
  EXPECT_NO_THROW(resolve_knn(*t, {"x"}, 2, Metric::euclidean, {0}));
}

// Housing rows carry a county label; brushing counties selects their houses.
TEST(Transfer, CountyBrushSelectsItsHouses) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t counties = 2 + rng() % 30;
    std::vector<std::string> county_names;
    for (std::size_t c = 0; c < counties; ++c) county_names.push_back("county" + std::to_string(c));
    const std::size_t houses = 1 + rng() % 400;
    // Some houses reference counties missing from the county table.
    auto house_county = random_labels(rng, houses, counties + 3);
    for (auto& s : house_county) s = "county" + s.substr(1);

    World w;
    auto c = w.add("counties", labelled(county_names, "name"));
    auto h = w.add("houses", labelled(house_county, "county"));
    auto brushed = random_subset(rng, counties, 0.2);
    auto got = transfer_categorical(*c, "name", *h, "county", brushed);

    std::vector<std::string> picked;
    for (auto r : brushed) picked.push_back(county_names[r]);
    oracle::Rows expected;
    for (std::size_t i = 0; i < houses; ++i)
      if (std::find(picked.begin(), picked.end(), house_county[i]) != picked.end()) expected.push_back(i);
    ASSERT_EQ(got, expected);
  }
}

// ---------------------------------------------------------------------------
// Engine behaviour

TEST(LinkEngine, SelfLinkExpandsBrushInTheSameEpoch) {
  World w;
  auto t = w.add("t", labelled({"a", "b", "a", "c", "b"}));
  w.engine.register_link(categorical("t", "t", "g"));
  std::vector<Epoch> epochs;
  t->add_listener({std::string(kBrushedColumn)}, [&](const ChangeNotice& n) { epochs.push_back(n.epoch); });
  t->set_brushed({0}, BrushMode::replace);
  EXPECT_EQ(t->brushed_rows(), (RowSet{0, 2}));
  ASSERT_EQ(epochs.size(), 2u);
  EXPECT_EQ(epochs[0], epochs[1]);
  EXPECT_EQ(w.engine.writes(), 1u);
}

TEST(LinkEngine, SelfLinkIsIdempotent) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    World w;
    const std::size_t n = 1 + rng() % 80;
    auto labels = random_labels(rng, n, 1 + rng() % 6);
    auto t = w.add("t", labelled(labels));
    w.engine.register_link(categorical("t", "t", "g"));
    t->set_brushed(random_subset(rng, n, 0.1), BrushMode::replace);
    const auto once = t->brushed_rows();
    t->set_brushed(once, BrushMode::replace);
    ASSERT_EQ(t->brushed_rows(), once);
  }
}

TEST(LinkEngine, IdentityLinkingIsSharedBrushedAcrossPlots) {
  World w;
  RawTable raw;
  raw.columns.push_back(Column::numeric("x", {1, 2, 3, 4}));
  raw.columns.push_back(Column::numeric("y", {4, 3, 2, 1}));
  auto t = w.add("t", std::move(raw));
  ScatterPlot a("a", t, "x", "y");
  HistogramPlot b("b", t, "x", 1.0, 0.0);
  a.full_scene();
  b.full_scene();
  const auto listeners = t->listener_count();
  w.engine.register_link(identity("t", "t"));
  EXPECT_EQ(t->listener_count(), listeners);
  t->set_brushed(a.hit_test_rect({0, 2.5, 2.5, 5}), BrushMode::replace);
  EXPECT_EQ(t->brushed_rows(), (RowSet{0, 1}));
  EXPECT_TRUE(b.dirty(kBrushLayer));
  EXPECT_FALSE(b.dirty(kMainLayer));
  EXPECT_EQ(w.engine.writes(), 0u);
}

TEST(LinkEngine, CrossTableLinkCarriesExpandedSelection) {
  // The outgoing link is registered first; the self-link still runs first.
  World w;
  auto a = w.add("a", labelled({"x", "y", "x", "z"}));
  auto b = w.add("b", labelled({"x", "z", "y", "x", "q"}));
  w.engine.register_link(categorical("a", "b", "g"));
  w.engine.register_link(categorical("a", "a", "g"));
  a->set_brushed({2}, BrushMode::replace);
  EXPECT_EQ(a->brushed_rows(), (RowSet{0, 2}));
  EXPECT_EQ(b->brushed_rows(), (RowSet{0, 3}));
}

TEST(LinkEngine, ThreeCycleTerminatesWithOneWritePerTable) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    World w;
    std::vector<std::shared_ptr<Mutaframe>> t;
    std::vector<std::vector<std::string>> labels;
    for (const char* id : {"a", "b", "c"}) {
      labels.push_back(random_labels(rng, 5 + rng() % 40, 6));
      t.push_back(w.add(id, labelled(labels.back())));
    }
    w.engine.register_link(categorical("a", "b", "g"));
    w.engine.register_link(categorical("b", "c", "g"));
    w.engine.register_link(categorical("c", "a", "g"));
    std::map<std::string, int> writes;
    for (auto& table : t)
      table->add_listener({std::string(kBrushedColumn)}, [&](const ChangeNotice& n) { ++writes[n.table_id]; });

    auto seed = random_subset(rng, t[0]->nrow(), 0.2);
    t[0]->set_brushed(seed, BrushMode::replace);

    EXPECT_EQ(writes["a"], 1);  // only the user's write
    EXPECT_EQ(writes["b"], 1);
    EXPECT_EQ(writes["c"], 1);
    ASSERT_EQ(w.engine.skips().size(), 1u);
    EXPECT_EQ(w.engine.skips()[0].target, "a");
    EXPECT_EQ(t[0]->brushed_rows(), seed);

    // b follows a, c follows b.
    std::set<std::string> from_a, from_b;
    for (auto r : seed) from_a.insert(labels[0][r]);
    for (std::size_t r = 0; r < labels[1].size(); ++r)
      if (from_a.count(labels[1][r])) from_b.insert(labels[1][r]);
    oracle::Rows expect_b, expect_c;
    for (std::size_t r = 0; r < labels[1].size(); ++r)
      if (from_a.count(labels[1][r])) expect_b.push_back(r);
    for (std::size_t r = 0; r < labels[2].size(); ++r)
      if (from_b.count(labels[2][r])) expect_c.push_back(r);
    EXPECT_EQ(t[1]->brushed_rows(), expect_b);
    EXPECT_EQ(t[2]->brushed_rows(), expect_c);
    EXPECT_EQ(t[0]->epoch(), t[2]->epoch());
  }
}

TEST(LinkEngine, MutualLinksFollowWhicheverSideWasBrushed) {
  World w;
  auto a = w.add("a", labelled({"x", "y", "z"}));
  auto b = w.add("b", labelled({"z", "x", "x"}));
  w.engine.register_link(categorical("a", "b", "g"));
  w.engine.register_link(categorical("b", "a", "g"));
  a->set_brushed({0}, BrushMode::replace);
  EXPECT_EQ(a->brushed_rows(), RowSet{0});
  EXPECT_EQ(b->brushed_rows(), (RowSet{1, 2}));
  b->set_brushed({0}, BrushMode::replace);
  EXPECT_EQ(b->brushed_rows(), RowSet{0});
  EXPECT_EQ(a->brushed_rows(), RowSet{2});
}

TEST(LinkEngine, KnnSelfLinkAddsNeighbours) {
  World w;
  RawTable raw;
  raw.columns.push_back(Column::numeric("x", {0, 1, 5, 6, 20}));
  auto t = w.add("t", std::move(raw));
  w.engine.register_link(knn_link("t", "t", {"x"}, 1));
  t->set_brushed({2}, BrushMode::replace);
  EXPECT_EQ(t->brushed_rows(), (RowSet{2, 3}));
}

TEST(LinkEngine, RegistrationErrors) {
  World w;
  auto a = w.add("a", labelled({"x", "y", "z"}));
  RawTable nums;
  nums.columns.push_back(Column::numeric("v", {1, 2, 3}));
  w.add("n", std::move(nums));
  auto code = [&](LinkSpec s) {
    try {
      w.engine.register_link(std::move(s));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::state;  // no error
  };
  EXPECT_EQ(code(categorical("a", "missing", "g")), ErrorCode::not_found);
  EXPECT_EQ(code(categorical("a", "a", "nope")), ErrorCode::not_found);
  EXPECT_EQ(code(categorical("n", "n", "v")), ErrorCode::type_mismatch);
  EXPECT_EQ(code(identity("a", "n")), ErrorCode::invalid_argument);
  EXPECT_EQ(code(knn_link("n", "a", {"v"}, 1)), ErrorCode::invalid_argument);
  EXPECT_EQ(code(knn_link("n", "n", {"v"}, 3)), ErrorCode::invalid_argument);
  EXPECT_EQ(code(knn_link("n", "n", {}, 1)), ErrorCode::invalid_argument);

  auto other = Mutaframe::augment("lonely", labelled({"x"}));
  w.tables["lonely"] = other;
  EXPECT_EQ(code(categorical("a", "lonely", "g")), ErrorCode::invalid_argument);
  EXPECT_EQ(w.engine.size(), 0u);
}

TEST(LinkEngine, RemovedLinksStopPropagating) {
  World w;
  auto a = w.add("a", labelled({"x", "y"}));
  auto b = w.add("b", labelled({"x", "y"}));
  auto id = w.engine.register_link(categorical("a", "b", "g"));
  EXPECT_EQ(w.engine.link(id).target, "b");
  w.engine.remove_link(id);
  a->set_brushed({0}, BrushMode::replace);
  EXPECT_TRUE(b->brushed_rows().empty());
  EXPECT_THROW(w.engine.remove_link(id), Error);
  EXPECT_THROW(w.engine.link(id), Error);
}

TEST(LinkEngine, DestructionDetachesListeners) {
  auto clock = std::make_shared<EpochClock>();
  auto a = Mutaframe::augment("a", labelled({"x", "y"}), clock);
  auto b = Mutaframe::augment("b", labelled({"x", "y"}), clock);
  const auto before = a->listener_count();
  {
    LinkEngine engine([&](std::string_view id) { return id == "a" ? a : id == "b" ? b : nullptr; });
    engine.register_link(categorical("a", "b", "g"));
    EXPECT_EQ(a->listener_count(), before + 1);
  }
  EXPECT_EQ(a->listener_count(), before);
  a->set_brushed({0}, BrushMode::replace);
  EXPECT_TRUE(b->brushed_rows().empty());
}
