#pragma once

#include <stdexcept>
#include <string>

namespace bikeflow {

// Base for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad arguments, broken invariants, malformed instances.
class ValidationError : public Error {
  public:
    using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

// A well-formed request the solver declines, e.g. brute force above its cap.
class InfeasibleError : public Error {
  public:
    using Error::Error;
};

// A point outside the grid's service area.
class OutOfAreaError : public Error {
  public:
    using Error::Error;
};

}  // namespace bikeflow
