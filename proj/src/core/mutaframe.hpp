#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "core/column.hpp"

namespace lv {

using Epoch = std::uint64_t;
using ListenerId = std::uint64_t;

inline constexpr std::string_view kBrushedColumn = ".brushed";
inline constexpr std::string_view kColorColumn = ".color";
inline constexpr Rgba kDefaultColor{0x59, 0x59, 0x59, 0xff};

// Shared by every table of one session so that a single user action and all
// of its link-engine reactions carry one epoch value.
class EpochClock {
 public:
  Epoch next() noexcept { return ++value_; }
  Epoch current() const noexcept { return value_; }

 private:
  Epoch value_ = 0;
};

struct ChangeNotice {
  std::string table_id;
  std::vector<std::string> changed_columns;  // sorted, nonempty
  std::optional<RowSet> changed_rows;        // nullopt means all rows
  std::vector<std::string> value_changed;    // subset of changed_columns whose values differ
  Epoch epoch = 0;

  bool all_rows() const noexcept { return !changed_rows.has_value(); }
  bool touches(std::string_view column) const;
};

using Listener = std::function<void(const ChangeNotice&)>;

struct ListenerOptions {
  // Opt-in: skip notices where no watched column actually changed value.
  bool suppress_unchanged = false;
};

enum class BrushMode { replace, union_, intersect, toggle };

std::optional<BrushMode> parse_brush_mode(std::string_view text);
std::string_view to_string(BrushMode mode);

// Values for a partial write. Numeric NaN marks a cell missing.
using CellValues =
    std::variant<std::vector<double>, std::vector<std::string>, BoolVector, std::vector<Rgba>>;

// Mutable, observable columnar table. Every assignment notifies listeners
// whose watched columns intersect the changed columns, in registration order.
// Single-threaded: all calls for one table must come from its session loop.
class Mutaframe : public std::enable_shared_from_this<Mutaframe> {
 public:
  // Appends `.brushed` (all false) and `.color` (kDefaultColor).
  static std::shared_ptr<Mutaframe> augment(std::string id, RawTable table,
                                            std::shared_ptr<EpochClock> clock = nullptr);

  Mutaframe(const Mutaframe&) = delete;
  Mutaframe& operator=(const Mutaframe&) = delete;
  ~Mutaframe();

  const std::string& id() const noexcept { return id_; }
  std::size_t nrow() const noexcept { return nrow_; }
  std::vector<std::string> column_names() const;
  bool has_column(std::string_view name) const noexcept;
  const Column& column(std::string_view name) const;

  const BoolVector& brushed() const;
  std::span<const Rgba> colors() const;
  RowSet brushed_rows() const { return rows_where(brushed()); }

  const std::shared_ptr<EpochClock>& clock() const noexcept { return clock_; }
  Epoch epoch() const noexcept { return epoch_; }
  std::uint64_t assignment_count() const noexcept { return assignments_; }
  std::uint64_t listener_invocations() const noexcept { return invocations_; }

  ListenerId add_listener(std::vector<std::string> watched, Listener callback,
                          ListenerOptions options = {});
  void remove_listener(ListenerId id);
  std::size_t listener_count() const noexcept { return listeners_.size(); }

  // Replaces a whole column; kind must match. Fires even for identical values.
  void set_column(std::string_view name, Column values, std::optional<Epoch> epoch = {});
  void set_numeric(std::string_view name, std::vector<double> values,
                   std::optional<Epoch> epoch = {});
  void set_cells(std::string_view name, const RowSet& rows, const CellValues& values,
                 std::optional<Epoch> epoch = {});
  void set_brushed(const RowSet& rows, BrushMode mode, std::optional<Epoch> epoch = {});

  // Coalesces all mutations made by `body` into one notice; nesting flattens.
  void transaction(const std::function<void()>& body);

  // Child table over `rows` of this one. `.brushed` / `.color` writes on the
  // child land on the parent rows, and parent changes are mirrored back.
  std::shared_ptr<Mutaframe> subset_view(std::string id, const RowSet& rows);
  const RowSet* parent_rows() const noexcept { return parent_ ? &row_map_ : nullptr; }
  std::shared_ptr<Mutaframe> parent() const noexcept { return parent_; }

  // Immutable copy for readers off the session loop.
  RawTable snapshot() const;

 private:
  struct Registration {
    ListenerId id;
    std::vector<std::string> watched;
    std::shared_ptr<Listener> callback;
    ListenerOptions options;
  };

  struct Pending {
    std::vector<std::string> columns;
    std::optional<RowSet> rows;
    bool all_rows = false;
    std::vector<std::string> value_changed;
    Epoch epoch = 0;
    bool any = false;
  };

  Mutaframe(std::string id, std::shared_ptr<EpochClock> clock);

  Column& column_mut(std::string_view name);
  std::size_t index_of(std::string_view name) const;
  Epoch resolve_epoch(std::optional<Epoch> epoch);
  void check_rows(const RowSet& rows) const;
  void record(std::vector<std::string> columns, std::optional<RowSet> rows,
              std::vector<std::string> value_changed, Epoch epoch);
  void dispatch(const ChangeNotice& notice);
  void on_parent_change(const ChangeNotice& notice);
  RowSet to_parent(const RowSet& rows) const;

  std::string id_;
  std::shared_ptr<EpochClock> clock_;
  std::vector<Column> columns_;
  std::size_t nrow_ = 0;
  std::vector<Registration> listeners_;
  ListenerId next_listener_ = 1;
  Epoch epoch_ = 0;
  std::uint64_t assignments_ = 0;
  std::uint64_t invocations_ = 0;

  int txn_depth_ = 0;
  Pending pending_;

  std::shared_ptr<Mutaframe> parent_;
  RowSet row_map_;                        // child row -> parent row
  std::vector<std::int64_t> reverse_map_;  // parent row -> child row or -1
  ListenerId parent_listener_ = 0;
};

}  // namespace lv
