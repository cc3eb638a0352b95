#pragma once

#include <stdexcept>
#include <string>

namespace roughstep {

/// A precondition of an operation was violated (dimension mismatch, bad
/// partition, invalid exponents, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The vector field lacks a derivative the requested scheme needs.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A computation produced a non-finite value or otherwise broke down.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace roughstep
