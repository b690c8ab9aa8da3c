#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace opbm {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file or string (bad JSON, missing/mistyped field).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Structurally well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& msg, std::vector<std::string> violations)
      : Error(msg), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Problem exceeds a configured size bound for an exact method.
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& msg) : Error(msg) {}
};

}  // namespace opbm
