#include "shapmat/core/error.hpp"

namespace shapmat {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kAlreadyExists: return "AlreadyExists";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUniverseMismatch: return "UniverseMismatch";
    case ErrorCode::kTreeMismatch: return "TreeMismatch";
    case ErrorCode::kDegenerateEmbedding: return "DegenerateEmbedding";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kSupportTooLarge: return "SupportTooLarge";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
    case ErrorCode::kNoCompatibleAnchor: return "NoCompatibleAnchor";
    case ErrorCode::kInvalidBudget: return "InvalidBudget";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kNotFitted: return "NotFitted";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInsufficientSupport: return "InsufficientSupport";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParseError,
            "line " + std::to_string(line) + ": " + message),
      line_(line) {}

SupportTooLarge::SupportTooLarge(std::size_t size, std::size_t limit)
    : Error(ErrorCode::kSupportTooLarge,
            "support of size " + std::to_string(size) + " exceeds limit " +
                std::to_string(limit)),
      size_(size),
      limit_(limit) {}

}  // namespace shapmat
