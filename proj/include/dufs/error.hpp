#pragma once

#include <stdexcept>
#include <string>

namespace dufs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied malformed data or an out-of-range parameter.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The kernel bandwidth resolved to zero (e.g. all points coincide).
class DegenerateBandwidth : public Error {
 public:
  using Error::Error;
};

/// A graph node has zero degree, so the random-walk normalization is undefined.
class DegenerateGraph : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf appeared during optimization, or a numerical check failed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// File could not be read, parsed or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dufs
