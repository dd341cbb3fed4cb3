#pragma once

#include <stdexcept>
#include <string>

namespace tasklaw {

/// Base of every error thrown by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a structural invariant (non-bijective step, unknown label, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Serial composition of tasks whose intermediate attributes partially overlap.
class CompositionUndefined : public Error {
 public:
  using Error::Error;
};

}  // namespace tasklaw
