#include "shapegrasp/error.hpp"

#include <atomic>
#include <iostream>

namespace shapegrasp {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidRotation: return "invalid-rotation";
    case ErrorCode::kDegenerateRotation: return "degenerate-rotation";
    case ErrorCode::kEmptyMesh: return "empty-mesh";
    case ErrorCode::kSdfUndefined: return "sdf-undefined";
    case ErrorCode::kEmptyCloud: return "empty-cloud";
    case ErrorCode::kNoGrasps: return "no-grasps";
    case ErrorCode::kEmptyBatch: return "empty-batch";
    case ErrorCode::kEmptyTable: return "empty-table";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNonFiniteLoss: return "non-finite-loss";
    case ErrorCode::kEmptyReconstruction: return "empty-reconstruction";
    case ErrorCode::kTooFewCorrespondences: return "too-few-correspondences";
    case ErrorCode::kEmptyList: return "empty-list";
    case ErrorCode::kEmptyUnion: return "empty-union";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void warn(const std::string& message) {
  if (g_warnings_enabled.load()) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled.store(enabled); }

}  // namespace shapegrasp
