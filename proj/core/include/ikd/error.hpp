#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ikd {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or invariant on caller-supplied data was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input (CSV, JSON, buffer files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  /// 1-based line number, 0 when unknown.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Log trimmed down to nothing: the recording holds no driving at all.
class CorruptLogError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientOverlapError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Model file whose tensor shapes do not match the network.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

/// The network produced a non-finite value.
class InferenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ikd
