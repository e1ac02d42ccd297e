#pragma once

#include <stdexcept>
#include <string>

namespace coop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter bundle violates one of its invariants.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DegenerateMassMatrix : public Error {
 public:
  using Error::Error;
};

/// The integrated state became non-finite. `last_valid_time` is the time of
/// the last finite sample.
class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// An angle lies outside the range where a formula is defined.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InfeasibleEquilibrium : public Error {
 public:
  using Error::Error;
};

class SingularEquilibrium : public Error {
 public:
  using Error::Error;
};

/// Inner-loop gains are not in the critically damped family.
class ParameterizationMismatch : public Error {
 public:
  using Error::Error;
};

class NoSolution : public Error {
 public:
  using Error::Error;
};

/// The reference governor was asked to hold a reference that is not
/// admissible from the current state.
class InfeasibleReference : public Error {
 public:
  using Error::Error;
};

/// Scenario file could not be parsed or validated. The message starts with
/// the dotted path of the offending field.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace coop
