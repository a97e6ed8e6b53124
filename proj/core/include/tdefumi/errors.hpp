#pragma once

#include <stdexcept>
#include <string>

namespace tdefumi {

// Raised when a caller passes parameters that violate a documented precondition.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents or vector layouts. Carries the offending line when known.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

// Training produced a non-finite objective.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tdefumi
