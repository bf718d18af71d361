#pragma once

#include <stdexcept>
#include <string>

namespace mnar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed table document (JSON or CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a table or model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A closed form would divide by a zero margin.
class DegenerateMarginError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient odds system.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Boundary resolution would have to pin every level of a variable.
class InfeasibleBoundaryError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace mnar
