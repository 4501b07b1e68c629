#include "core/meta.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace lv {

bool Limits::valid() const noexcept {
  return std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) && std::isfinite(ymax) &&
         xmin < xmax && ymin < ymax;
}

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::vector: return "vector";
    case FieldKind::rect: return "rect";
    case FieldKind::procedure: return "procedure";
  }
  return "?";
}

namespace {

void check_value(const std::string& name, const FieldValue& value) {
  if (auto* lim = std::get_if<Limits>(&value); lim && !lim->valid())
    throw Error(ErrorCode::invalid_argument,
                "field '" + name + "': limits require xmin < xmax and ymin < ymax");
}

}  // namespace

MetaObject::MetaObject(std::string id, std::vector<std::pair<std::string, FieldValue>> fields)
    : id_(std::move(id)) {
  for (auto& [name, value] : fields) {
    if (has_field(name))
      throw Error(ErrorCode::invalid_argument, "duplicate meta field '" + name + "'");
    check_value(name, value);
    fields_.push_back({std::move(name), std::move(value), {}});
  }
}

std::vector<std::string> MetaObject::field_names() const {
  std::vector<std::string> out;
  for (const auto& f : fields_) out.push_back(f.name);
  return out;
}

bool MetaObject::has_field(std::string_view name) const noexcept {
  return std::any_of(fields_.begin(), fields_.end(), [&](const Field& f) { return f.name == name; });
}

std::size_t MetaObject::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < fields_.size(); ++i)
    if (fields_[i].name == name) return i;
  throw Error(ErrorCode::not_found, "meta '" + id_ + "' has no field '" + std::string(name) + "'");
}

FieldKind MetaObject::kind(std::string_view name) const {
  return static_cast<FieldKind>(fields_[index_of(name)].value.index());
}

FieldValue MetaObject::get_field(std::string_view name) const { return fields_[index_of(name)].value; }

double MetaObject::scalar(std::string_view name) const {
  const auto& v = fields_[index_of(name)].value;
  if (auto* d = std::get_if<double>(&v)) return *d;
  throw Error(ErrorCode::type_mismatch, "field '" + std::string(name) + "' is not a scalar");
}

const std::vector<double>& MetaObject::vector(std::string_view name) const {
  const auto& v = fields_[index_of(name)].value;
  if (auto* d = std::get_if<std::vector<double>>(&v)) return *d;
  throw Error(ErrorCode::type_mismatch, "field '" + std::string(name) + "' is not a vector");
}

const Limits& MetaObject::limits(std::string_view name) const {
  const auto& v = fields_[index_of(name)].value;
  if (auto* d = std::get_if<Limits>(&v)) return *d;
  throw Error(ErrorCode::type_mismatch, "field '" + std::string(name) + "' is not a rect");
}

const LabelGenerator& MetaObject::procedure(std::string_view name) const {
  const auto& v = fields_[index_of(name)].value;
  if (auto* d = std::get_if<LabelGenerator>(&v)) return *d;
  throw Error(ErrorCode::type_mismatch, "field '" + std::string(name) + "' is not a procedure");
}

void MetaObject::set_field(std::string_view name, FieldValue value) {
  const auto idx = index_of(name);
  auto& field = fields_[idx];
  if (value.index() != field.value.index())
    throw Error(ErrorCode::type_mismatch,
                "field '" + field.name + "' is " +
                    std::string(to_string(static_cast<FieldKind>(field.value.index()))) + ", got " +
                    std::string(to_string(static_cast<FieldKind>(value.index()))));
  check_value(field.name, value);
  if (field.validator) field.validator(value);
  FieldValue old = std::exchange(field.value, std::move(value));
  ++assignments_;

  std::vector<ListenerId> ids;
  for (const auto& reg : listeners_)
    if (reg.field == idx) ids.push_back(reg.id);
  for (auto id : ids) {
    auto it = std::find_if(listeners_.begin(), listeners_.end(),
                           [&](const Registration& r) { return r.id == id; });
    if (it == listeners_.end()) continue;
    auto callback = it->callback;
    (*callback)(old, fields_[idx].value);
  }
}

void MetaObject::set_validator(std::string_view name, std::function<void(const FieldValue&)> check) {
  fields_[index_of(name)].validator = std::move(check);
}

ListenerId MetaObject::on_field_changed(std::string_view name, FieldListener callback) {
  const auto idx = index_of(name);
  auto id = next_listener_++;
  listeners_.push_back({id, idx, std::make_shared<FieldListener>(std::move(callback))});
  return id;
}

void MetaObject::remove_listener(ListenerId id) {
  auto it = std::find_if(listeners_.begin(), listeners_.end(),
                         [&](const Registration& r) { return r.id == id; });
  if (it == listeners_.end())
    throw Error(ErrorCode::not_found, "meta '" + id_ + "' has no listener " + std::to_string(id));
  listeners_.erase(it);
}

}  // namespace lv
