#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coiso {

// Malformed user input: polynomial strings, JSON files, out-of-contract arguments.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public InputError {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : InputError(what + " (line " + std::to_string(line) + ", column " +
                   std::to_string(column) + ")"),
        line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

// Operands built over different chart variable sets.
class VariableMismatch : public InputError {
public:
  using InputError::InputError;
};

// Numeric integration left its domain (escape from the chart box, blowup).
class NumericAbort : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace coiso
