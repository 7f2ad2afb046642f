#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simplenet {

enum class ErrorCode {
  invalid_argument,
  shape_mismatch,
  config,
  state,
  undefined_metric,
  protocol_violation,
  validation,
  bad_magic,
  bad_version,
  checksum_mismatch,
  truncated,
  malformed,
  io,
  numerical_check,
  internal,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the engine; `code()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace simplenet
