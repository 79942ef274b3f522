#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradalg {

// Ill-formed input: mismatched monoids, bad grades, unknown operations.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configured size cap was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A finite model was asked about a grade outside its support.
class SupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                           ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace gradalg
