#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace brand {

enum class ErrorCode {
  InvalidArgument,
  InsufficientRows,
  SingularSubset,
  DegenerateData,
  NotPositiveDefinite,
  EmptySlice,
  AllSlicesEmpty,
  LengthMismatch,
  InvalidKnots,
  RankDeficientBasis,
  GridMismatch,
  ParseError,
  DimensionMismatch,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// True for errors caused by the numerics (singular matrices, failed
/// factorizations) rather than by malformed input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// 1-based training class the error was raised for, when known.
  std::optional<int> class_index() const noexcept { return class_index_; }

  /// Copy of this error tagged with a training class index.
  Error with_class(int class_index) const;

 private:
  ErrorCode code_;
  std::optional<int> class_index_;
};

}  // namespace brand
