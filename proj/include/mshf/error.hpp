#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mshf {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateSubset,
  kInsufficientData,
  kTooManyDegenerate,
  kEmptyHypergraph,
  kLengthMismatch,
  kUnknownTemplate,
  kParseError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception type; the code
// distinguishes conditions callers are expected to handle (e.g. a degenerate
// minimal subset is routine during sampling).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mshf
