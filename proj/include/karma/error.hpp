#pragma once

#include <stdexcept>
#include <string>

namespace karma {

// Base for every error the library raises. Callers that only need a
// message can catch std::runtime_error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration (exit status 1 at the CLI).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem / stream failures (exit status 2 at the CLI).
class IoError : public Error {
 public:
  using Error::Error;
};

// Referential or structural inconsistency between logs, plan and corpus.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A numeric kernel cannot produce an estimate for its input
// (single-class outcome, singular design, separation, empty denominator).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace karma
