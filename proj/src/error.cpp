#include "patternmine/error.hpp"

namespace patternmine {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTemplate: return "MalformedTemplate";
    case ErrorCode::CompileError: return "CompileError";
    case ErrorCode::InvalidTask: return "InvalidTask";
    case ErrorCode::ShardIOError: return "ShardIOError";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::DuplicateScore: return "DuplicateScore";
    case ErrorCode::InvalidScore: return "InvalidScore";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateVocabulary: return "DegenerateVocabulary";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::IOError: return "IOError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace patternmine
