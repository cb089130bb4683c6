// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cpft {

/// Root of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed data violating a domain invariant (score range, dangling reference, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numeric precondition violated.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Not enough data to satisfy a requested split or subsample.
class SizingError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration (encoder, training, sweep, CLI config file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad arguments to a pure function (length mismatch, empty input).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, int batch)
      : Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

/// Correlation requested on a sample with zero variance.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// Analysis could not be carried out (too few usable rows).
class AnalysisError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint file unreadable or inconsistent with the expected model.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpft
