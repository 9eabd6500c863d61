#pragma once

#include <stdexcept>
#include <string>

namespace convtok {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: bad schema, violated invariant, invalid option value.
// The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure: missing file, unreadable or unwritable path.
// The CLI maps this to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace convtok
