#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace metafact {

enum class ErrorKind {
  InvalidDimension,
  NonFiniteInput,
  NotSquare,
  DimensionMismatch,
  SingularTriangular,
  RankDeficientAnchor,
  InconsistentSystem,
  RankTooLarge,
  SingularMiddle,
  NotFullRank,
  ZeroMatrix,
  IndexOutOfRange,
  DuplicateIndex,
  PivotBreakdown,
  SingularMixing,
  InvalidPeriod,
  InvalidSpec,
  InvalidArgument,
  ParseError,
  UnsupportedFormat,
  IoError,
};

/// Stable machine-readable name, e.g. "RankDeficientAnchor".
std::string_view kind_name(ErrorKind kind) noexcept;

/// True for kinds that signal numerical breakdown rather than bad input.
bool is_numerical_breakdown(ErrorKind kind) noexcept;

/// The single exception type thrown by the library. ParseError carries the
/// 1-based line number of the offending input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  Error(ErrorKind kind, const std::string& message, std::size_t line);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> line_;
};

}  // namespace metafact
