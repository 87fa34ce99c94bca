// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Language-model backends. A completion takes a system directive, the
// conversation so far and the rendered reasoning graph, and returns text.

#include <cstddef>
#include <memory>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cdiag::agent {

struct Turn {
  std::string role;  // "user" or "assistant"
  std::string content;
  bool operator==(const Turn&) const = default;
};

struct CompletionRequest {
  std::string system;
  std::vector<Turn> turns;
  std::string dot_context;

  /// Content of the last user turn, or "" when there is none.
  std::string_view last_user() const;
};

/// Transport failure, timeout, malformed reply, or a strict fixture miss.
class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

struct FixtureEntry {
  std::string match;
  bool pattern = false;  // ECMAScript regex instead of substring
  std::string response;
};

/// Canned responses keyed on the last user turn; first match wins.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend(std::string name, std::vector<FixtureEntry> entries, bool strict = true);

  std::string name() const override { return name_; }
  /// Strict mode throws BackendError on a miss; otherwise a miss returns "".
  std::string complete(const CompletionRequest& request) override;

  bool strict() const { return strict_; }
  const std::vector<FixtureEntry>& entries() const { return entries_; }
  std::size_t calls() const;
  std::size_t misses() const;

 private:
  std::string name_;
  std::vector<FixtureEntry> entries_;
  std::vector<std::regex> compiled_;  // parallel to entries_, empty for substrings
  bool strict_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
  std::size_t misses_ = 0;
};

/// Fixture file:
///   {"name": "...", "strict": true,
///    "entries": [{"match": "...", "pattern": false, "response": "..."}]}
std::unique_ptr<ScriptedBackend> scripted_backend_from_json(const nlohmann::json& j);
std::unique_ptr<ScriptedBackend> load_scripted_backend(const std::string& path);

/// Non-strict backend with no fixtures: every completion is "".
std::unique_ptr<ScriptedBackend> empty_backend();

}  // namespace cdiag::agent
