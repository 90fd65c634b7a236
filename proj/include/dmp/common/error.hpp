#pragma once

#include <stdexcept>
#include <string>

namespace dmp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed configuration or argument (bad layer sizes, k >= |P|, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Tensor or container shapes that do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation invoked in the wrong order, e.g. backward() before forward().
class StateError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf reached a checked boundary.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// A geometric neighborhood too degenerate to define a normal.
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what, std::size_t index = 0)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Kernel matrix is not positive semi-definite even after jitter.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmp
