#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace domcity {

enum class ErrorCode {
  kNoSuchNode,
  kPathNotResolvable,
  kMalformedMeasurement,
  kUnresolvablePaths,
  kDegenerateTexture,
  kMissingGeometry,
  kRevisionOrder,
  kInvalidFilter,
  kInvalidStyle,
  kSchema,
  kIo,
};

const char* to_string(ErrorCode code);
// Stable snake_case identifier, e.g. "invalid_filter".
const char* code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by resolve_path; step() is the index into the path that failed.
class PathError : public Error {
 public:
  PathError(std::size_t step, const std::string& message)
      : Error(ErrorCode::kPathNotResolvable, message), step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace domcity
