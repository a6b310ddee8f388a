#pragma once

#include <stdexcept>
#include <string>

namespace oritrans {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: wrong dimensions, degenerate segments, bad JSON schema.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// ∂T differs from the boundary required by the instance.
class BoundaryMismatch : public Error {
 public:
  using Error::Error;
};

// A hard enumeration or size guard was hit. Never a silent truncation.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

// The boundary cannot be carried by the given support (channel imbalance).
class Infeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace oritrans
