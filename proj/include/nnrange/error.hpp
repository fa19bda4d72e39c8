#pragma once

#include <stdexcept>
#include <string>

namespace nnrange {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed network / polyhedron / config file.
class ParseError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The closure of a polyhedron has no point.
class InfeasibleSet : public Error {
 public:
  using Error::Error;
};

class UnboundedSet : public Error {
 public:
  using Error::Error;
};

/// The polyhedron is nonempty but has no interior (largest inscribed ball radius ~ 0).
class DegenerateSet : public Error {
 public:
  using Error::Error;
};

/// The simplex kernel stalled or lost its basis factorization.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration refused: too many hidden neurons.
class TooLarge : public Error {
 public:
  using Error::Error;
};

class EmptyGrid : public Error {
 public:
  using Error::Error;
};

}  // namespace nnrange
