#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace udleak {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by validate_config. Carries the offending field names.
class ConfigError : public Error {
 public:
  ConfigError(std::vector<std::string> fields, const std::string& message)
      : Error(message), fields_(std::move(fields)) {}

  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  std::vector<std::string> fields_;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class NotNormalized : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class RegulatorTooSmall : public Error {
 public:
  using Error::Error;
};

class UnsupportedSwitching : public Error {
 public:
  using Error::Error;
};

/// Raised when an adaptive integral misses its tolerance; `entry()` names the
/// worst offender.
class QuadratureNonConvergence : public Error {
 public:
  QuadratureNonConvergence(std::string entry, const std::string& message)
      : Error(message), entry_(std::move(entry)) {}

  const std::string& entry() const noexcept { return entry_; }

 private:
  std::string entry_;
};

class NotDistributional : public Error {
 public:
  using Error::Error;
};

class ModeMismatch : public Error {
 public:
  using Error::Error;
};

class BranchViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace udleak
