#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latentdyn {

enum class ErrorCode {
  // input errors
  FileNotFound,
  IoFailure,
  BadMagic,
  TruncatedFile,
  NonFiniteValue,
  UnsupportedDtype,
  MalformedFile,
  RaggedRows,
  ParseFailure,
  InvalidModel,
  MalformedCode,
  // precondition violations
  Precondition,
  DimensionMismatch,
  RankDeficient,
  SeriesTooShort,
  DegenerateExtent,
  NonEncodable,
  NotFailing,
  IndexOutOfModel,
  // numeric failures
  NonConvergence,
  Divergence,
};

enum class ErrorCategory { Input, Precondition, Numeric };

std::string_view error_code_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

/// Process exit status for an error: 2 input, 3 precondition, 4 numeric.
int exit_status(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. what() is "<CodeName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// NonEncodable carries the 0-based position of the first glyph outside the code table.
class NonEncodableError : public Error {
 public:
  explicit NonEncodableError(std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

inline void require(bool cond, const std::string& detail) {
  if (!cond) fail(ErrorCode::Precondition, detail);
}

}  // namespace latentdyn
