// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/common/error.hpp"

#include "cdiag/common/text.hpp"

namespace cdiag {

InsufficientDataError::InsufficientDataError(std::size_t have, std::size_t required)
    : std::runtime_error("insufficient data: have " + std::to_string(have) +
                         " samples, need at least " + std::to_string(required)),
      have_(have),
      required_(required) {}

NoSolutionError::NoSolutionError(double target, double attainable_low, double attainable_high)
    : std::runtime_error("no solution for target " + format_number(target) +
                         "; attainable range [" + format_number(attainable_low) + ", " +
                         format_number(attainable_high) + "]"),
      target_(target),
      low_(attainable_low),
      high_(attainable_high) {}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

}  // namespace cdiag
