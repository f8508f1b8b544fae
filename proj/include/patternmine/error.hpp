#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace patternmine {

enum class ErrorCode {
  MalformedTemplate,
  CompileError,
  InvalidTask,
  ShardIOError,
  EmptyClass,
  MissingScore,
  DuplicateScore,
  InvalidScore,
  EmptyInput,
  DegenerateVocabulary,
  DivergenceDetected,
  UnknownLabel,
  IOError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a stable code so the CLI can
/// report it as machine-readable JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace patternmine
