#include "metafact/error.hpp"

namespace metafact {

std::string_view kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularTriangular: return "SingularTriangular";
    case ErrorKind::RankDeficientAnchor: return "RankDeficientAnchor";
    case ErrorKind::InconsistentSystem: return "InconsistentSystem";
    case ErrorKind::RankTooLarge: return "RankTooLarge";
    case ErrorKind::SingularMiddle: return "SingularMiddle";
    case ErrorKind::NotFullRank: return "NotFullRank";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DuplicateIndex: return "DuplicateIndex";
    case ErrorKind::PivotBreakdown: return "PivotBreakdown";
    case ErrorKind::SingularMixing: return "SingularMixing";
    case ErrorKind::InvalidPeriod: return "InvalidPeriod";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical_breakdown(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularTriangular:
    case ErrorKind::RankDeficientAnchor:
    case ErrorKind::SingularMiddle:
    case ErrorKind::NotFullRank:
    case ErrorKind::PivotBreakdown:
    case ErrorKind::SingularMixing:
    case ErrorKind::ZeroMatrix:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + message), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& message, std::size_t line)
    : std::runtime_error(std::string(kind_name(kind)) + ": line " + std::to_string(line) + ": " +
                         message),
      kind_(kind),
      line_(line) {}

}  // namespace metafact
