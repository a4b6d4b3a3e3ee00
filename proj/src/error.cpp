#include "homd/error.hpp"

namespace homd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonManifoldEdge: return "NonManifoldEdge";
    case ErrorCode::kDegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::kInconsistentOrientation: return "InconsistentOrientation";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kMeshMismatch: return "MeshMismatch";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kWeightShapeMismatch: return "WeightShapeMismatch";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kZeroNormal: return "ZeroNormal";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDegenerateFace: return "DegenerateFace";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParseError,
            line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

}  // namespace homd
