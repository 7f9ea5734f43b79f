#include "brand/error.hpp"

namespace brand {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::SingularSubset: return "SingularSubset";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::EmptySlice: return "EmptySlice";
    case ErrorCode::AllSlicesEmpty: return "AllSlicesEmpty";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidKnots: return "InvalidKnots";
    case ErrorCode::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularSubset:
    case ErrorCode::DegenerateData:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::AllSlicesEmpty:
    case ErrorCode::RankDeficientBasis:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::with_class(int class_index) const {
  std::string msg = what();
  // Strip the code prefix added by the constructor so it is not repeated.
  const std::string prefix = std::string(to_string(code_)) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  Error tagged(code_, "class " + std::to_string(class_index) + ": " + msg);
  tagged.class_index_ = class_index;
  return tagged;
}

}  // namespace brand
