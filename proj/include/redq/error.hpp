#pragma once

#include <stdexcept>
#include <string>

namespace redq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (config files, distribution specs, trace files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a model constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidRequestDegree : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConditioningOnNullEvent : public Error {
 public:
  using Error::Error;
};

class IntegrationDivergence : public Error {
 public:
  using Error::Error;
};

class InsufficientReplications : public Error {
 public:
  using Error::Error;
};

class SchedulingInPast : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A completion was delivered to a server that holds no job: engine bug.
class CompletionOnNonBusyServer : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised by the models' self-checks when a structural invariant breaks.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace redq
