#include "simplenet/error.hpp"

namespace simplenet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::config: return "config";
    case ErrorCode::state: return "state";
    case ErrorCode::undefined_metric: return "undefined-metric";
    case ErrorCode::protocol_violation: return "protocol-violation";
    case ErrorCode::validation: return "validation";
    case ErrorCode::bad_magic: return "bad-magic";
    case ErrorCode::bad_version: return "bad-version";
    case ErrorCode::checksum_mismatch: return "checksum-mismatch";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::malformed: return "malformed";
    case ErrorCode::io: return "io";
    case ErrorCode::numerical_check: return "numerical-check";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace simplenet
