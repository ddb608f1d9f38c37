#pragma once

#include <stdexcept>
#include <string>

namespace qbench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed class names, dimension mismatches, out-of-range parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Gram-Schmidt hit a (numerically) linearly dependent column.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Gradient requested where it does not exist (own optimum with s < 2).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace qbench
