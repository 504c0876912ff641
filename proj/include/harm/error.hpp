#pragma once

#include <stdexcept>
#include <string>

namespace harm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A law, utility spec or dataset breaks one of its invariants, or an input
/// file cannot be parsed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A conditional expectation was requested on an empty conditioning event.
class PositivityError : public Error {
 public:
  using Error::Error;
};

/// Experimental and non-experimental inputs cannot both have come from one
/// full law satisfying the fusion assumptions.
class IncompatibleLawError : public Error {
 public:
  using Error::Error;
};

/// The requested quantity is not point-identified by the available data.
class IdentificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace harm
