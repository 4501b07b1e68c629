#include "core/link_engine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "core/error.hpp"

namespace lv {

std::optional<LinkKind> parse_link_kind(std::string_view text) {
  if (text == "identity") return LinkKind::identity;
  if (text == "categorical") return LinkKind::categorical;
  if (text == "knn") return LinkKind::knn;
  return std::nullopt;
}

std::optional<Metric> parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::euclidean;
  if (text == "manhattan") return Metric::manhattan;
  return std::nullopt;
}

std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::identity: return "identity";
    case LinkKind::categorical: return "categorical";
    case LinkKind::knn: return "knn";
  }
  return "?";
}

std::string_view to_string(Metric metric) {
  return metric == Metric::euclidean ? "euclidean" : "manhattan";
}

RowSet resolve_categorical(const Mutaframe& table, std::string_view key, const RowSet& seed) {
  const auto& col = table.column(key);
  const auto& cat = col.as_categorical();
  std::vector<std::uint8_t> chosen(cat.levels.size(), 0);
  for (auto r : seed) {
    if (r >= table.nrow()) throw Error(ErrorCode::out_of_range, "seed row out of range");
    if (!col.missing[r]) chosen[static_cast<std::size_t>(cat.codes[r])] = 1;
  }
  RowSet out;
  for (std::size_t r = 0; r < cat.codes.size(); ++r)
    if (!col.missing[r] && chosen[static_cast<std::size_t>(cat.codes[r])]) out.push_back(r);
  // Seeds with a missing key stay selected.
  std::vector<RowIndex> merged;
  std::set_union(out.begin(), out.end(), seed.begin(), seed.end(), std::back_inserter(merged));
  return merged;
}

RowSet resolve_knn(const Mutaframe& table, const std::vector<std::string>& vars, std::size_t k,
                   Metric metric, const RowSet& seed, bool standardize) {
  if (vars.empty()) throw Error(ErrorCode::invalid_argument, "knn needs at least one variable");
  if (k == 0 || k >= table.nrow())
    throw Error(ErrorCode::invalid_argument,
                "knn k must satisfy 1 <= k < nrow (" + std::to_string(table.nrow()) + ")");

  const auto n = table.nrow();
  std::vector<std::span<const double>> cols;
  std::vector<std::uint8_t> usable(n, 1);
  for (const auto& v : vars) {
    const auto& col = table.column(v);
    cols.push_back(col.as_numeric());
    for (std::size_t r = 0; r < n; ++r)
      if (col.missing[r]) usable[r] = 0;
  }

  std::vector<double> scale(vars.size(), 1.0);
  if (standardize) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      double sum = 0, sq = 0;
      std::size_t m = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (!usable[r]) continue;
        sum += cols[j][r];
        ++m;
      }
      if (m < 2) continue;
      const double mean = sum / static_cast<double>(m);
      for (std::size_t r = 0; r < n; ++r)
        if (usable[r]) sq += (cols[j][r] - mean) * (cols[j][r] - mean);
      const double sd = std::sqrt(sq / static_cast<double>(m - 1));
      if (sd > 0) scale[j] = sd;
    }
  }

  auto distance = [&](RowIndex a, RowIndex b) {
    double acc = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double d = (cols[j][a] - cols[j][b]) / scale[j];
      acc += metric == Metric::euclidean ? d * d : std::abs(d);
    }
    return metric == Metric::euclidean ? std::sqrt(acc) : acc;
  };

  std::vector<RowIndex> out(seed.begin(), seed.end());
  std::vector<std::pair<double, RowIndex>> cand;
  cand.reserve(n);
  for (auto s : seed) {
    if (s >= n) throw Error(ErrorCode::out_of_range, "seed row out of range");
    if (!usable[s]) continue;
    cand.clear();
    for (RowIndex r = 0; r < n; ++r)
      if (r != s && usable[r]) cand.emplace_back(distance(s, r), r);
    const auto take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    for (std::size_t i = 0; i < take; ++i) out.push_back(cand[i].second);
  }
  return normalize_rows(std::move(out));
}

RowSet transfer_categorical(const Mutaframe& source, std::string_view source_key,
                            const Mutaframe& target, std::string_view target_key,
                            const RowSet& source_rows) {
  const auto& scol = source.column(source_key);
  const auto& tcol = target.column(target_key);
  const auto& scat = scol.as_categorical();
  const auto& tcat = tcol.as_categorical();

  std::unordered_set<std::string_view> labels;
  for (auto r : source_rows) {
    if (r >= source.nrow()) throw Error(ErrorCode::out_of_range, "source row out of range");
    if (!scol.missing[r]) labels.insert(scat.levels[static_cast<std::size_t>(scat.codes[r])]);
  }
  std::vector<std::uint8_t> chosen(tcat.levels.size(), 0);
  for (std::size_t i = 0; i < tcat.levels.size(); ++i) chosen[i] = labels.count(tcat.levels[i]) ? 1 : 0;

  RowSet out;
  for (std::size_t r = 0; r < tcat.codes.size(); ++r)
    if (!tcol.missing[r] && chosen[static_cast<std::size_t>(tcat.codes[r])]) out.push_back(r);
  return out;
}

// ---------------------------------------------------------------------------

LinkEngine::LinkEngine(TableLookup lookup) : lookup_(std::move(lookup)) {}

LinkEngine::~LinkEngine() {
  for (const auto& w : watches_) {
    if (auto t = w.table.lock()) {
      try {
        t->remove_listener(w.listener);
      } catch (const Error&) {
      }
    }
  }
}

std::shared_ptr<Mutaframe> LinkEngine::table(std::string_view id) const {
  auto t = lookup_(id);
  if (!t) throw Error(ErrorCode::not_found, "unknown table '" + std::string(id) + "'");
  return t;
}

void LinkEngine::validate(const LinkSpec& spec) const {
  auto source = table(spec.source);
  auto target = table(spec.target.empty() ? spec.source : spec.target);
  if (source->clock() != target->clock())
    throw Error(ErrorCode::invalid_argument, "linked tables must share one session clock");
  switch (spec.kind) {
    case LinkKind::identity:
      if (source != target)
        throw Error(ErrorCode::invalid_argument, "identity links are within one table");
      break;
    case LinkKind::categorical:
      source->column(spec.source_key).as_categorical();
      target->column(spec.target_key.empty() ? spec.source_key : spec.target_key).as_categorical();
      break;
    case LinkKind::knn:
      if (source != target)
        throw Error(ErrorCode::invalid_argument, "knn links are self-links");
      if (spec.vars.empty()) throw Error(ErrorCode::invalid_argument, "knn link needs variables");
      for (const auto& v : spec.vars) source->column(v).as_numeric();
      if (spec.k < 1 || spec.k >= source->nrow())
        throw Error(ErrorCode::invalid_argument,
                    "knn k must satisfy 1 <= k < nrow (" + std::to_string(source->nrow()) + ")");
      break;
  }
}

LinkId LinkEngine::register_link(LinkSpec spec) {
  if (spec.target.empty()) spec.target = spec.source;
  if (spec.kind == LinkKind::categorical && spec.target_key.empty()) spec.target_key = spec.source_key;
  validate(spec);
  const auto id = next_id_++;
  const bool implicit = spec.kind == LinkKind::identity;
  const std::string source_id = spec.source;
  links_.push_back({id, std::move(spec)});
  // Same-table linking needs no listener; every view of a table already shares `.brushed`.
  if (!implicit && watched_tables_.insert(source_id).second) {
    auto source = table(source_id);
    auto listener = source->add_listener({std::string(kBrushedColumn)},
                                         [this](const ChangeNotice& n) { propagate(n); });
    watches_.push_back({source, listener});
  }
  return id;
}

void LinkEngine::remove_link(LinkId id) {
  auto it = std::find_if(links_.begin(), links_.end(), [&](const Entry& e) { return e.id == id; });
  if (it == links_.end()) throw Error(ErrorCode::not_found, "unknown link " + std::to_string(id));
  links_.erase(it);
}

const LinkSpec& LinkEngine::link(LinkId id) const {
  for (const auto& e : links_)
    if (e.id == id) return e.spec;
  throw Error(ErrorCode::not_found, "unknown link " + std::to_string(id));
}

RowSet LinkEngine::resolve(const Entry& entry, const Mutaframe& source, const Mutaframe& target) const {
  const auto& s = entry.spec;
  const auto brushed = source.brushed_rows();
  switch (s.kind) {
    case LinkKind::categorical:
      if (&source == &target && s.source_key == s.target_key)
        return resolve_categorical(source, s.source_key, brushed);
      return transfer_categorical(source, s.source_key, target, s.target_key, brushed);
    case LinkKind::knn:
      return resolve_knn(source, s.vars, s.k, s.metric, brushed, s.standardize);
    case LinkKind::identity:
      return brushed;
  }
  return brushed;
}

void LinkEngine::propagate(const ChangeNotice& notice) {
  if (!notice.touches(kBrushedColumn)) return;
  if (notice.epoch != epoch_) {
    epoch_ = notice.epoch;
    origin_ = notice.table_id;
    written_.clear();
  }
  // Self-links first so that outgoing links carry the expanded selection
  // regardless of registration order.
  std::vector<LinkId> ids;
  for (const auto& e : links_)
    if (e.spec.source == notice.table_id && e.spec.kind != LinkKind::identity && e.spec.target == e.spec.source)
      ids.push_back(e.id);
  for (const auto& e : links_)
    if (e.spec.source == notice.table_id && e.spec.kind != LinkKind::identity && e.spec.target != e.spec.source)
      ids.push_back(e.id);

  for (auto id : ids) {
    auto it = std::find_if(links_.begin(), links_.end(), [&](const Entry& e) { return e.id == id; });
    if (it == links_.end()) continue;
    const Entry entry = *it;
    const bool self = entry.spec.source == entry.spec.target;
    if (written_.count(entry.spec.target) || (entry.spec.target == origin_ && !self)) {
      skips_.push_back({epoch_, entry.id, entry.spec.target});
      continue;
    }
    auto source = table(entry.spec.source);
    auto target = table(entry.spec.target);
    auto rows = resolve(entry, *source, *target);
    written_.insert(entry.spec.target);
    ++writes_;
    target->set_brushed(rows, BrushMode::replace, notice.epoch);
  }
}

}  // namespace lv
