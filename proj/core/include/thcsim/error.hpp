#pragma once

#include <stdexcept>
#include <string>

namespace thcsim {

enum class ErrorCode {
  kDegenerateSegment,
  kAxialObstacle,
  kSingularField,
  kDivergentRollouts,
  kUnknownScenario,
  kInvalidConfig,
};

const char* to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace thcsim
