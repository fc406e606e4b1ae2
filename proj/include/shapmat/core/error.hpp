#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapmat {

enum class ErrorCode {
  kNotFound,
  kAlreadyExists,
  kInvalidArgument,
  kUniverseMismatch,
  kTreeMismatch,
  kDegenerateEmbedding,
  kKindMismatch,
  kSupportTooLarge,
  kKeyMismatch,
  kNoCompatibleAnchor,
  kInvalidBudget,
  kTooLarge,
  kNotFitted,
  kParseError,
  kInsufficientSupport,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  // 1-based line number in the offending file; the header is line 1.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SupportTooLarge : public Error {
 public:
  SupportTooLarge(std::size_t size, std::size_t limit);

  std::size_t size() const noexcept { return size_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t size_;
  std::size_t limit_;
};

}  // namespace shapmat
