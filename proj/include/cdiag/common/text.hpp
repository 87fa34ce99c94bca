// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdiag {

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double value);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
/// Splits on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// 64-bit FNV-1a; stable across platforms, used for seeding.
std::uint64_t fnv1a(std::string_view s);
/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace cdiag
