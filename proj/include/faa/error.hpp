// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace faa {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not chain (matrix products, stale caches, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied value violates an operation precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Method or experiment configuration is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Factorization or inversion failed even after regularization.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A data partition cannot satisfy the requested quotas.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace faa
