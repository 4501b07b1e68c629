#pragma once

#include <stdexcept>
#include <string>

namespace lv {

enum class ErrorCode {
  invalid_argument = 1,
  not_found,
  type_mismatch,
  out_of_range,
  parse,
  io,
  state,
};

// All engine failures surface as lv::Error; the C boundary maps `code` to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lv
