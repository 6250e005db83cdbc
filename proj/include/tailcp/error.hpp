#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tailcp {

enum class ErrorCode {
  InvalidArgument,
  InvalidSpec,
  InvalidConfig,
  InvalidHermiteRegime,
  NonPositivePrice,
  TooShort,
  IndexOutOfRange,
  DegenerateSeries,
  EmbeddingNotPSD,
  EmptyGrid,
  NoExceedances,
  InsufficientPrefix,
  NonPositiveReference,
  NoAdmissibleK,
  ParseError,
  NotFound,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Coarse grouping used for process exit codes.
enum class ErrorCategory { Validation, Parse, Domain, Io };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tailcp
