#pragma once

#include <stdexcept>
#include <string>

namespace shapegrasp {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidRotation,
  kDegenerateRotation,
  kEmptyMesh,
  kSdfUndefined,
  kEmptyCloud,
  kNoGrasps,
  kEmptyBatch,
  kEmptyTable,
  kDimensionMismatch,
  kNonFiniteLoss,
  kEmptyReconstruction,
  kTooFewCorrespondences,
  kEmptyList,
  kEmptyUnion,
  kBadMagic,
  kVersionMismatch,
  kIo,
  kConfig,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Writes a one-line warning to stderr unless warnings are silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace shapegrasp
