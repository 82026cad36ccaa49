#pragma once

#include <stdexcept>
#include <string>

namespace binpack {

// Invalid configuration or argument supplied by a caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Messages name the offending line when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An object that cannot be placed under the half-box size rule.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (a bug, not bad data).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite value encountered during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace binpack
