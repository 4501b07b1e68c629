#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "core/column.hpp"
#include "core/geometry.hpp"

namespace lv {

using ListenerId = std::uint64_t;

// What a query at a position resolved to; handed to label generators.
struct QueryPayload {
  enum class Kind { none, bin, bar, point };
  Kind kind = Kind::none;
  std::string level;     // bar level
  double lo = 0, hi = 0;  // bin interval
  std::size_t count = 0;
  std::size_t brushed = 0;
  double proportion = 0;
  std::optional<RowIndex> row;
  std::vector<std::pair<std::string, std::string>> values;  // point fields
  std::string label;

  bool empty() const noexcept { return kind == Kind::none; }
};

using LabelGenerator = std::function<std::string(const QueryPayload&)>;

enum class FieldKind { scalar, vector, rect, procedure };
using FieldValue = std::variant<double, std::vector<double>, Limits, LabelGenerator>;
using FieldListener = std::function<void(const FieldValue& old_value, const FieldValue& new_value)>;

std::string_view to_string(FieldKind kind);

// Reactive record of plot-local state. Each field has a fixed kind and its
// own ordered listener list; every set_field fires that list (the implicit
// "<field>Changed" event), even when the value is unchanged.
class MetaObject {
 public:
  MetaObject(std::string id, std::vector<std::pair<std::string, FieldValue>> fields);

  const std::string& id() const noexcept { return id_; }
  std::vector<std::string> field_names() const;
  bool has_field(std::string_view name) const noexcept;
  FieldKind kind(std::string_view name) const;

  FieldValue get_field(std::string_view name) const;
  double scalar(std::string_view name) const;
  const std::vector<double>& vector(std::string_view name) const;
  const Limits& limits(std::string_view name = "limits") const;
  const LabelGenerator& procedure(std::string_view name) const;

  void set_field(std::string_view name, FieldValue value);

  // Extra check run before a value is stored; throwing rejects the assignment.
  void set_validator(std::string_view name, std::function<void(const FieldValue&)> check);

  ListenerId on_field_changed(std::string_view name, FieldListener callback);
  void remove_listener(ListenerId id);

  std::uint64_t assignment_count() const noexcept { return assignments_; }

 private:
  struct Field {
    std::string name;
    FieldValue value;
    std::function<void(const FieldValue&)> validator;
  };
  struct Registration {
    ListenerId id;
    std::size_t field;
    std::shared_ptr<FieldListener> callback;
  };

  std::size_t index_of(std::string_view name) const;

  std::string id_;
  std::vector<Field> fields_;
  std::vector<Registration> listeners_;
  ListenerId next_listener_ = 1;
  std::uint64_t assignments_ = 0;
};

}  // namespace lv
