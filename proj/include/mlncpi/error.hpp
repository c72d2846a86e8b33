#pragma once

#include <stdexcept>
#include <string>

namespace mlncpi {

struct SourceLocation {
  int line = 0;
  int column = 0;
};

// Malformed model or evidence text. Carries a 1-based line/column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, SourceLocation loc)
      : std::runtime_error(format(message, loc)), loc_(loc), message_(message) {}

  SourceLocation location() const { return loc_; }
  const std::string& message() const { return message_; }

 private:
  static std::string format(const std::string& message, SourceLocation loc) {
    return "line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column) + ": " + message;
  }

  SourceLocation loc_;
  std::string message_;
};

// Misuse of logic operations: incomplete bindings, non-ground input, arity mismatch.
class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The brute-force oracle refuses instances above its size guard.
class OracleSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mlncpi
