#pragma once

#include <stdexcept>
#include <string>

namespace noderag {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A node or edge violates a heterograph invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Persisted file could not be decoded.
class FormatError : public Error {
public:
  enum class Kind { VersionMismatch, ChecksumMismatch, Truncated, Malformed };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

/// An operation's precondition on the graph shape does not hold (e.g. edgeless graph).
class NotApplicableError : public Error {
public:
  using Error::Error;
};

// llmio failures. TransportError is the only retryable one.
class TransportError : public Error {
public:
  TransportError(const std::string& what, int status = 0) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

private:
  int status_;
};

class AuthError : public Error {
public:
  using Error::Error;
};

class ContextLengthError : public Error {
public:
  using Error::Error;
};

class RetriesExhaustedError : public Error {
public:
  using Error::Error;
};

/// Model output could not be parsed into the template's schema.
class ExtractionError : public Error {
public:
  using Error::Error;
};

class IndexingError : public Error {
public:
  using Error::Error;
};

class QueryError : public Error {
public:
  using Error::Error;
};

/// Retrieval succeeded but answer synthesis failed; the assembled context is kept.
class SynthesisError : public Error {
public:
  SynthesisError(const std::string& what, std::string context)
      : Error(what), context_(std::move(context)) {}
  const std::string& context() const noexcept { return context_; }

private:
  std::string context_;
};

}  // namespace noderag
