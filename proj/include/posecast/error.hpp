// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace posecast {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (bad kind, non-positive size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (shape mismatch, T < 1, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Matrix or feature width does not match what the consumer expects.
class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable file (wrong magic, truncated blob, bad JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Schema violation in an ingested dataset record.
class ValidationError : public Error {
 public:
  enum class Kind { missing_field, joint_count, non_finite, duplicate_id, bad_value, parse };

  ValidationError(Kind kind, std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::string last_good)
      : Error(what), last_good_(std::move(last_good)) {}

  /// Path of the most recent checkpoint written before the divergence, or empty.
  const std::string& last_good_checkpoint() const noexcept { return last_good_; }

 private:
  std::string last_good_;
};

}  // namespace posecast
