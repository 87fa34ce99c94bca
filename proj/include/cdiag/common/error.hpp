// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdiag {

/// Caller violated an operation's precondition.
class MisuseError : public std::invalid_argument {
 public:
  explicit MisuseError(const std::string& what) : std::invalid_argument(what) {}
};

class NotFoundError : public std::runtime_error {
 public:
  explicit NotFoundError(const std::string& what) : std::runtime_error(what) {}
};

/// A state transition was requested from a state that does not allow it.
class ConflictError : public std::runtime_error {
 public:
  explicit ConflictError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class InsufficientDataError : public std::runtime_error {
 public:
  InsufficientDataError(std::size_t have, std::size_t required);

  std::size_t have() const noexcept { return have_; }
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t have_;
  std::size_t required_;
};

class NoSolutionError : public std::runtime_error {
 public:
  NoSolutionError(double target, double attainable_low, double attainable_high);

  double target() const noexcept { return target_; }
  double attainable_low() const noexcept { return low_; }
  double attainable_high() const noexcept { return high_; }

 private:
  double target_;
  double low_;
  double high_;
};

/// Malformed structured input. Line and column are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

}  // namespace cdiag
