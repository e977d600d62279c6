#pragma once

#include <stdexcept>
#include <string>

namespace fpt {

/// Base class for every rejection raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

/// A precondition on an argument (shape, range, validity) does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

/// A serialized artifact (FPT1 container, calibration, pose or manifest file)
/// is malformed or cannot be read/written.
class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format_error"; }
};

}  // namespace fpt
