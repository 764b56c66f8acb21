#include "latentdyn/error.hpp"

namespace latentdyn {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::MalformedCode: return "MalformedCode";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::DegenerateExtent: return "DegenerateExtent";
    case ErrorCode::NonEncodable: return "NonEncodable";
    case ErrorCode::NotFailing: return "NotFailing";
    case ErrorCode::IndexOutOfModel: return "IndexOutOfModel";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::Divergence: return "Divergence";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound:
    case ErrorCode::IoFailure:
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedFile:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::UnsupportedDtype:
    case ErrorCode::MalformedFile:
    case ErrorCode::RaggedRows:
    case ErrorCode::ParseFailure:
    case ErrorCode::InvalidModel:
    case ErrorCode::MalformedCode:
      return ErrorCategory::Input;
    case ErrorCode::NonConvergence:
    case ErrorCode::Divergence:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Precondition;
  }
}

int exit_status(ErrorCode code) noexcept {
  switch (error_category(code)) {
    case ErrorCategory::Input: return 2;
    case ErrorCategory::Precondition: return 3;
    case ErrorCategory::Numeric: return 4;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

NonEncodableError::NonEncodableError(std::size_t position)
    : Error(ErrorCode::NonEncodable,
            "glyph at position " + std::to_string(position) + " has no Godel code"),
      position_(position) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace latentdyn
