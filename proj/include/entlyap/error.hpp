#pragma once

#include <stdexcept>
#include <string>

namespace entlyap {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit together (subsystem dims, register size).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition on a value was violated (non-Hermitian input,
// mixed state where a pure one is required, unsorted probability vector).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// User-facing parameter is out of range or names an unknown option.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A scalar function was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A quantity that must be real came out with a significant imaginary part.
class NumericalIntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace entlyap
