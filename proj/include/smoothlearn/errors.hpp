#pragma once

#include <stdexcept>
#include <string>

namespace smoothlearn {

// Base of every error raised by the library. Callers that only care about
// "something was wrong with the input" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of the operation (x outside [0,1],
// epsilon outside its admissible range, q < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Two observations share a coordinate but disagree on the value.
class DuplicateConflict : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A trace contains a repeated input coordinate where a distance sum needs d > 0.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class UnknownKind : public Error {
 public:
  using Error::Error;
};

// Adversary driven out of order.
class SequenceError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class InequalityViolation : public Error {
 public:
  using Error::Error;
};

class AuditFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace smoothlearn
