// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mtrx {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A model parameter violates its admissible range. The message names the
/// violated inequality.
class ConstraintViolation : public Error {
public:
  using Error::Error;
};

class GridMismatch : public Error {
public:
  explicit GridMismatch(const std::string& where)
      : Error("grid mismatch in " + where) {}
};

/// An operation that requires a positive relaxation time was called on the
/// limiting (epsilon = 0) system.
class EpsilonZero : public Error {
public:
  explicit EpsilonZero(const std::string& where)
      : Error(where + ": requires epsilon > 0") {}
};

class NonFinite : public Error {
public:
  using Error::Error;
};

/// The solution stopped being finite during a step.
class BlowUp : public Error {
public:
  BlowUp(const std::string& term, double time)
      : Error("blow-up in " + term + " at t=" + std::to_string(time)), term_(term), time_(time) {}

  const std::string& term() const noexcept { return term_; }
  double time() const noexcept { return time_; }

private:
  std::string term_;
  double time_;
};

class StepTooSmall : public Error {
public:
  using Error::Error;
};

class TimeMismatch : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed or unreadable checkpoint file.
class FormatError : public Error {
public:
  using Error::Error;
};

class UnsupportedVersion : public FormatError {
public:
  using FormatError::FormatError;
};

} // namespace mtrx
