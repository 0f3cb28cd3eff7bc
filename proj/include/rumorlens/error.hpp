#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rumorlens {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace rumorlens
