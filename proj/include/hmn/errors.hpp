#pragma once

#include <stdexcept>
#include <string>

namespace hmn {

/// Malformed user input: bad files, bad parameters, empty corpora.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parse failure at a known location in a data file.
class ParseError : public InputError {
 public:
  ParseError(const std::string& where, const std::string& what)
      : InputError(where + ": " + what) {}
};

/// Violated precondition that the caller was responsible for.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Operand shapes do not conform to an operation's rules.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hmn
