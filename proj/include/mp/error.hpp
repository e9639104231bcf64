#pragma once

#include <stdexcept>
#include <string>

namespace mp {

enum class ErrorCode {
  DegenerateInput,
  NotARotation,
  InvalidBox,
  EmptyRender,
  NoCorrespondences,
  NoConsensus,
  PixelNotCovered,
  UnknownCategory,
  ParseError,
  IndexOutOfRange,
  EmptyGroundTruth,
  NoValidPixels,
  InvalidInput,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// Library error carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mp
