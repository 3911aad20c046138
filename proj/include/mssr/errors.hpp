#pragma once

#include <stdexcept>
#include <string>

namespace mssr {

// Base for everything thrown on purpose by this library. The CLI maps the
// concrete types onto process exit codes; see tools/mssr_main.cpp.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (dimension mismatch, non-finite
// input, malformed grid, ...). Exit code 2.
class ContractViolationError : public Error {
 public:
  using Error::Error;
};

// A run configuration is inconsistent or incomplete. Exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A name was not found in the catalog or another registry. Exit code 2.
class LookupError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A requested operation is outside what the differentiation engine (or
// another subsystem) supports. Exit code 2.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss or gradient. Carries the iteration at
// which it happened. Exit code 3.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : Error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// The integrator lost probability mass beyond the acceptable defect,
// typically because the step size is too large for the rates. Exit code 3.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double t, double defect)
      : Error(what), t_(t), defect_(defect) {}
  double time() const { return t_; }
  double defect() const { return defect_; }

 private:
  double t_;
  double defect_;
};

// File I/O failed or a file had an unexpected format. Exit code 4.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mssr
