#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace homd {

enum class ErrorCode {
  kNonManifoldEdge,
  kDegenerateTriangle,
  kInconsistentOrientation,
  kIndexOutOfRange,
  kMeshMismatch,
  kChannelMismatch,
  kWeightShapeMismatch,
  kCountMismatch,
  kZeroNormal,
  kNonFinite,
  kDegenerateFace,
  kInvalidArgument,
  kParseError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
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

  /// 1-based line of the offending record; 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace homd
