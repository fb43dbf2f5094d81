#pragma once

#include <stdexcept>
#include <string>

namespace psmon {

/// Raised on contract violations: malformed input, invalid configuration,
/// ordering violations in reports, encoding failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EncodingError : public Error {
 public:
  explicit EncodingError(const std::string& what) : Error(what) {}
};

}  // namespace psmon
