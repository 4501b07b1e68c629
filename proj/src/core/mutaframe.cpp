#include "core/mutaframe.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "core/error.hpp"

namespace lv {

namespace {

bool is_augmented(std::string_view name) {
  return name == kBrushedColumn || name == kColorColumn;
}

bool is_sorted_unique(const RowSet& rows) {
  return std::adjacent_find(rows.begin(), rows.end(),
                            [](RowIndex a, RowIndex b) { return a >= b; }) == rows.end();
}

bool intersects(const std::vector<std::string>& watched, const std::vector<std::string>& columns) {
  if (watched.empty()) return !columns.empty();
  for (const auto& w : watched)
    if (std::find(columns.begin(), columns.end(), w) != columns.end()) return true;
  return false;
}

void merge_sorted(std::vector<std::string>& into, const std::vector<std::string>& from) {
  std::vector<std::string> out;
  std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
  into = std::move(out);
}

Column take_rows(const Column& src, const RowSet& rows) {
  Column out{src.name, {}, {}};
  out.missing.reserve(rows.size());
  for (auto r : rows) out.missing.push_back(src.missing[r]);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Categorical>) {
          Categorical cat;
          cat.levels = v.levels;
          for (auto r : rows) cat.codes.push_back(v.codes[r]);
          out.values = std::move(cat);
        } else {
          T sub;
          sub.reserve(rows.size());
          for (auto r : rows) sub.push_back(v[r]);
          out.values = std::move(sub);
        }
      },
      src.values);
  return out;
}

CellValues cells_of(const Column& col) {
  switch (col.kind()) {
    case ColumnKind::numeric: {
      auto v = col.as_numeric();
      std::vector<double> out(v.begin(), v.end());
      for (std::size_t i = 0; i < out.size(); ++i)
        if (col.is_missing(i)) out[i] = std::nan("");
      return out;
    }
    case ColumnKind::categorical: {
      const auto& cat = col.as_categorical();
      std::vector<std::string> out;
      for (auto code : cat.codes) out.push_back(code < 0 ? std::string{} : cat.levels[code]);
      return out;
    }
    case ColumnKind::boolean: return col.as_boolean();
    case ColumnKind::color: {
      auto v = col.as_color();
      return std::vector<Rgba>(v.begin(), v.end());
    }
  }
  return {};
}

std::size_t cell_count(const CellValues& values) {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

}  // namespace

bool ChangeNotice::touches(std::string_view column) const {
  return std::find(changed_columns.begin(), changed_columns.end(), column) != changed_columns.end();
}

std::optional<BrushMode> parse_brush_mode(std::string_view text) {
  if (text == "replace") return BrushMode::replace;
  if (text == "union") return BrushMode::union_;
  if (text == "intersect") return BrushMode::intersect;
  if (text == "toggle") return BrushMode::toggle;
  return std::nullopt;
}

std::string_view to_string(BrushMode mode) {
  switch (mode) {
    case BrushMode::replace: return "replace";
    case BrushMode::union_: return "union";
    case BrushMode::intersect: return "intersect";
    case BrushMode::toggle: return "toggle";
  }
  return "?";
}

Mutaframe::Mutaframe(std::string id, std::shared_ptr<EpochClock> clock)
    : id_(std::move(id)), clock_(clock ? std::move(clock) : std::make_shared<EpochClock>()) {}

Mutaframe::~Mutaframe() {
  if (parent_ && parent_listener_) {
    try {
      parent_->remove_listener(parent_listener_);
    } catch (const Error&) {
    }
  }
}

std::shared_ptr<Mutaframe> Mutaframe::augment(std::string id, RawTable table,
                                              std::shared_ptr<EpochClock> clock) {
  if (table.columns.empty())
    throw Error(ErrorCode::invalid_argument, "cannot augment a table with no columns");
  std::unordered_set<std::string> names;
  const auto n = table.columns.front().size();
  for (const auto& col : table.columns) {
    if (is_augmented(col.name))
      throw Error(ErrorCode::invalid_argument, "column name '" + col.name + "' is reserved");
    if (!col.name.empty() && col.name.front() == '.')
      throw Error(ErrorCode::invalid_argument,
                  "column name '" + col.name + "' uses the reserved '.' prefix");
    if (!names.insert(col.name).second)
      throw Error(ErrorCode::invalid_argument, "duplicate column name '" + col.name + "'");
    if (col.size() != n)
      throw Error(ErrorCode::invalid_argument, "column '" + col.name + "' has the wrong length");
    col.validate();
  }
  std::shared_ptr<Mutaframe> mf(new Mutaframe(std::move(id), std::move(clock)));
  mf->nrow_ = n;
  mf->columns_ = std::move(table.columns);
  mf->columns_.push_back(Column::boolean(std::string(kBrushedColumn), BoolVector(n, 0)));
  mf->columns_.push_back(Column::color(std::string(kColorColumn), std::vector<Rgba>(n, kDefaultColor)));
  return mf;
}

std::vector<std::string> Mutaframe::column_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

bool Mutaframe::has_column(std::string_view name) const noexcept {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

std::size_t Mutaframe::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  throw Error(ErrorCode::not_found, "table '" + id_ + "' has no column '" + std::string(name) + "'");
}

const Column& Mutaframe::column(std::string_view name) const { return columns_[index_of(name)]; }
Column& Mutaframe::column_mut(std::string_view name) { return columns_[index_of(name)]; }

const BoolVector& Mutaframe::brushed() const { return column(kBrushedColumn).as_boolean(); }
std::span<const Rgba> Mutaframe::colors() const { return column(kColorColumn).as_color(); }

ListenerId Mutaframe::add_listener(std::vector<std::string> watched, Listener callback,
                                   ListenerOptions options) {
  for (const auto& name : watched) index_of(name);
  std::sort(watched.begin(), watched.end());
  watched.erase(std::unique(watched.begin(), watched.end()), watched.end());
  auto id = next_listener_++;
  listeners_.push_back(
      {id, std::move(watched), std::make_shared<Listener>(std::move(callback)), options});
  return id;
}

void Mutaframe::remove_listener(ListenerId id) {
  auto it = std::find_if(listeners_.begin(), listeners_.end(),
                         [&](const Registration& r) { return r.id == id; });
  if (it == listeners_.end())
    throw Error(ErrorCode::not_found, "table '" + id_ + "' has no listener " + std::to_string(id));
  listeners_.erase(it);
}

Epoch Mutaframe::resolve_epoch(std::optional<Epoch> epoch) {
  if (epoch) return *epoch;
  if (txn_depth_ > 0 && pending_.any) return pending_.epoch;
  return clock_->next();
}

void Mutaframe::check_rows(const RowSet& rows) const {
  if (!is_sorted_unique(rows))
    throw Error(ErrorCode::invalid_argument, "row set must be sorted and duplicate-free");
  if (!rows.empty() && rows.back() >= nrow_)
    throw Error(ErrorCode::out_of_range, "row " + std::to_string(rows.back()) +
                                             " out of range for table '" + id_ + "' with " +
                                             std::to_string(nrow_) + " rows");
}

RowSet Mutaframe::to_parent(const RowSet& rows) const {
  RowSet out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(row_map_[r]);
  return out;
}

void Mutaframe::set_column(std::string_view name, Column values, std::optional<Epoch> epoch) {
  auto& col = column_mut(name);
  if (values.kind() != col.kind())
    throw Error(ErrorCode::type_mismatch, "column '" + col.name + "' is " +
                                              std::string(to_string(col.kind())) + ", got " +
                                              std::string(to_string(values.kind())));
  if (values.missing.empty()) values.missing.assign(values.size(), 0);
  if (values.size() != nrow_)
    throw Error(ErrorCode::invalid_argument, "column '" + col.name + "' expects " +
                                                 std::to_string(nrow_) + " values, got " +
                                                 std::to_string(values.size()));
  values.name = col.name;
  values.validate();
  if (is_augmented(name) &&
      std::any_of(values.missing.begin(), values.missing.end(), [](auto m) { return m != 0; }))
    throw Error(ErrorCode::invalid_argument, "'" + col.name + "' cannot hold missing values");

  const auto e = resolve_epoch(epoch);
  if (parent_ && is_augmented(name)) {
    parent_->set_cells(name, row_map_, cells_of(values), e);
    return;
  }
  std::vector<std::string> changed;
  if (!col.same_values(values)) changed.push_back(col.name);
  std::string colname = col.name;
  col = std::move(values);
  record({colname}, std::nullopt, std::move(changed), e);
}

void Mutaframe::set_numeric(std::string_view name, std::vector<double> values,
                            std::optional<Epoch> epoch) {
  std::vector<std::uint8_t> missing(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) missing[i] = std::isnan(values[i]) ? 1 : 0;
  set_column(name, Column::numeric(std::string(name), std::move(values), std::move(missing)), epoch);
}

void Mutaframe::set_cells(std::string_view name, const RowSet& rows, const CellValues& values,
                          std::optional<Epoch> epoch) {
  auto& col = column_mut(name);
  check_rows(rows);
  if (cell_count(values) != rows.size())
    throw Error(ErrorCode::invalid_argument, "set_cells: " + std::to_string(rows.size()) +
                                                 " rows but " + std::to_string(cell_count(values)) +
                                                 " values");
  if (rows.empty()) return;

  const bool kind_ok = (col.kind() == ColumnKind::numeric && std::holds_alternative<std::vector<double>>(values)) ||
                       (col.kind() == ColumnKind::categorical && std::holds_alternative<std::vector<std::string>>(values)) ||
                       (col.kind() == ColumnKind::boolean && std::holds_alternative<BoolVector>(values)) ||
                       (col.kind() == ColumnKind::color && std::holds_alternative<std::vector<Rgba>>(values));
  if (!kind_ok)
    throw Error(ErrorCode::type_mismatch, "values do not match " +
                                              std::string(to_string(col.kind())) + " column '" +
                                              col.name + "'");

  const auto e = resolve_epoch(epoch);
  if (parent_ && is_augmented(name)) {
    parent_->set_cells(name, to_parent(rows), values, e);
    return;
  }

  bool differs = false;
  switch (col.kind()) {
    case ColumnKind::numeric: {
      auto& dst = std::get<std::vector<double>>(col.values);
      const auto& src = std::get<std::vector<double>>(values);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        auto r = rows[i];
        const std::uint8_t miss = std::isnan(src[i]) ? 1 : 0;
        if (miss != col.missing[r] || (!miss && dst[r] != src[i])) differs = true;
        dst[r] = src[i];
        col.missing[r] = miss;
      }
      break;
    }
    case ColumnKind::categorical: {
      auto& cat = std::get<Categorical>(col.values);
      const auto& src = std::get<std::vector<std::string>>(values);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        auto r = rows[i];
        auto it = std::find(cat.levels.begin(), cat.levels.end(), src[i]);
        std::int32_t code;
        if (it == cat.levels.end()) {
          code = static_cast<std::int32_t>(cat.levels.size());
          cat.levels.push_back(src[i]);
        } else {
          code = static_cast<std::int32_t>(it - cat.levels.begin());
        }
        if (cat.codes[r] != code || col.missing[r]) differs = true;
        cat.codes[r] = code;
        col.missing[r] = 0;
      }
      break;
    }
    case ColumnKind::boolean: {
      auto& dst = std::get<BoolVector>(col.values);
      const auto& src = std::get<BoolVector>(values);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::uint8_t v = src[i] ? 1 : 0;
        if (dst[rows[i]] != v) differs = true;
        dst[rows[i]] = v;
      }
      break;
    }
    case ColumnKind::color: {
      auto& dst = std::get<std::vector<Rgba>>(col.values);
      const auto& src = std::get<std::vector<Rgba>>(values);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(dst[rows[i]] == src[i])) differs = true;
        dst[rows[i]] = src[i];
      }
      break;
    }
  }
  std::vector<std::string> changed;
  if (differs) changed.push_back(col.name);
  record({col.name}, rows, std::move(changed), e);
}

void Mutaframe::set_brushed(const RowSet& rows, BrushMode mode, std::optional<Epoch> epoch) {
  check_rows(rows);
  const auto e = resolve_epoch(epoch);
  if (parent_) {
    parent_->set_brushed(to_parent(rows), mode, e);
    return;
  }
  auto& flags = std::get<BoolVector>(column_mut(kBrushedColumn).values);
  RowSet flipped;
  if (mode == BrushMode::replace) {
    BoolVector next(nrow_, 0);
    for (auto r : rows) next[r] = 1;
    const bool differs = next != flags;
    flags = std::move(next);
    record({std::string(kBrushedColumn)}, std::nullopt,
           differs ? std::vector<std::string>{std::string(kBrushedColumn)} : std::vector<std::string>{}, e);
    return;
  }
  if (mode == BrushMode::intersect) {
    // Rows outside `rows` are cleared; walk both in order.
    auto it = rows.begin();
    for (RowIndex r = 0; r < nrow_; ++r) {
      const bool keep = it != rows.end() && *it == r;
      if (keep) ++it;
      if (flags[r] && !keep) {
        flags[r] = 0;
        flipped.push_back(r);
      }
    }
  } else {
    for (auto r : rows) {
      const std::uint8_t next = mode == BrushMode::toggle ? !flags[r] : 1;
      if (next != flags[r]) {
        flags[r] = next;
        flipped.push_back(r);
      }
    }
  }
  // No flip still notifies (assignment semantics); with no rows to name, report all.
  if (flipped.empty()) {
    record({std::string(kBrushedColumn)}, std::nullopt, {}, e);
  } else {
    record({std::string(kBrushedColumn)}, std::move(flipped), {std::string(kBrushedColumn)}, e);
  }
}

void Mutaframe::transaction(const std::function<void()>& body) {
  ++txn_depth_;
  auto finish = [this] {
    if (--txn_depth_ > 0 || !pending_.any) return;
    Pending p = std::move(pending_);
    pending_ = Pending{};
    ChangeNotice notice{id_, std::move(p.columns),
                        p.all_rows ? std::nullopt : std::move(p.rows), std::move(p.value_changed),
                        p.epoch};
    dispatch(notice);
  };
  try {
    body();
  } catch (...) {
    finish();
    throw;
  }
  finish();
}

void Mutaframe::record(std::vector<std::string> columns, std::optional<RowSet> rows,
                       std::vector<std::string> value_changed, Epoch epoch) {
  std::sort(columns.begin(), columns.end());
  std::sort(value_changed.begin(), value_changed.end());
  if (txn_depth_ == 0) {
    dispatch(ChangeNotice{id_, std::move(columns), std::move(rows), std::move(value_changed), epoch});
    return;
  }
  if (!pending_.any) {
    pending_.any = true;
    pending_.epoch = epoch;
  }
  merge_sorted(pending_.columns, columns);
  merge_sorted(pending_.value_changed, value_changed);
  if (!rows) {
    pending_.all_rows = true;
    pending_.rows.reset();
  } else if (!pending_.all_rows) {
    if (!pending_.rows) pending_.rows = RowSet{};
    RowSet merged;
    std::set_union(pending_.rows->begin(), pending_.rows->end(), rows->begin(), rows->end(),
                   std::back_inserter(merged));
    pending_.rows = std::move(merged);
  }
}

void Mutaframe::dispatch(const ChangeNotice& notice) {
  ++assignments_;
  epoch_ = notice.epoch;
  std::vector<ListenerId> ids;
  ids.reserve(listeners_.size());
  for (const auto& reg : listeners_) ids.push_back(reg.id);
  for (auto id : ids) {
    // A listener may have been removed by an earlier callback in this pass.
    auto it = std::lower_bound(listeners_.begin(), listeners_.end(), id,
                               [](const Registration& r, ListenerId v) { return r.id < v; });
    if (it == listeners_.end() || it->id != id) continue;
    if (!intersects(it->watched, notice.changed_columns)) continue;
    if (it->options.suppress_unchanged && !intersects(it->watched, notice.value_changed)) continue;
    auto callback = it->callback;
    ++invocations_;
    (*callback)(notice);
  }
}

std::shared_ptr<Mutaframe> Mutaframe::subset_view(std::string id, const RowSet& rows) {
  check_rows(rows);
  std::shared_ptr<Mutaframe> child(new Mutaframe(std::move(id), clock_));
  child->nrow_ = rows.size();
  for (const auto& col : columns_) child->columns_.push_back(take_rows(col, rows));
  child->parent_ = shared_from_this();
  child->row_map_ = rows;
  child->reverse_map_.assign(nrow_, -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    child->reverse_map_[rows[i]] = static_cast<std::int64_t>(i);
  std::weak_ptr<Mutaframe> weak = child;
  child->parent_listener_ = add_listener(
      {std::string(kBrushedColumn), std::string(kColorColumn)},
      [weak](const ChangeNotice& notice) {
        if (auto self = weak.lock()) self->on_parent_change(notice);
      });
  return child;
}

void Mutaframe::on_parent_change(const ChangeNotice& notice) {
  std::optional<RowSet> child_rows;
  if (!notice.all_rows()) {
    RowSet mapped;
    for (auto r : *notice.changed_rows) {
      auto c = reverse_map_[r];
      if (c >= 0) mapped.push_back(static_cast<RowIndex>(c));
    }
    if (mapped.empty()) return;
    child_rows = std::move(mapped);
  }

  std::vector<std::string> columns, changed;
  for (auto name : {kBrushedColumn, kColorColumn}) {
    if (!notice.touches(name)) continue;
    columns.emplace_back(name);
    const auto& src = parent_->column(name);
    auto& dst = column_mut(name);
    bool differs = false;
    auto copy_row = [&](RowIndex c) {
      const auto p = row_map_[c];
      if (name == kBrushedColumn) {
        auto& d = std::get<BoolVector>(dst.values)[c];
        const auto s = src.as_boolean()[p];
        differs |= d != s;
        d = s;
      } else {
        auto& d = std::get<std::vector<Rgba>>(dst.values)[c];
        const auto s = src.as_color()[p];
        differs |= !(d == s);
        d = s;
      }
    };
    if (child_rows) {
      for (auto c : *child_rows) copy_row(c);
    } else {
      for (RowIndex c = 0; c < nrow_; ++c) copy_row(c);
    }
    if (differs) changed.emplace_back(name);
  }
  record(std::move(columns), std::move(child_rows), std::move(changed), notice.epoch);
}

RawTable Mutaframe::snapshot() const { return RawTable{columns_}; }

}  // namespace lv
