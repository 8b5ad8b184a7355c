#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tts {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular to working precision.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A stability requirement fails, so an integral covariance diverges.
class InfeasibilityError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Data too degenerate to fit (zero RMS, too few points).
class DegenerateDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Config text could not be parsed; carries the offending line and key.
class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, std::string key, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ", key '" + key +
                    "': " + what),
        line_(line),
        key_(std::move(key)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

/// An iterate became non-finite or left the divergence guard.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t index, const std::string& what)
      : Error("diverged at n = " + std::to_string(index) + ": " + what),
        index_(index) {}

  /// Iteration index of the first offending iterate.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace tts
