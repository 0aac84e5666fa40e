#pragma once

#include <stdexcept>
#include <string>

namespace vispr {

// Base class for all engine errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or state that violates an operation's contract.
class DomainError : public Error {
public:
  using Error::Error;
};

// Malformed program text. Carries the (1-based) line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& message, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_ = 0;
};

// Grammar-valid program that fails registry or binding checks.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Failure reported by (or on the way to) a backend capability.
class BackendError : public Error {
public:
  using Error::Error;
};

// The planner is unreachable or returned an unusable completion.
class PlannerError : public Error {
public:
  using Error::Error;
};

// Invalid configuration file or flag combination.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace vispr
