// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// One directory per session under the store root:
//
//   <root>/<session id>/session.json      rounds, invocations, status
//   <root>/<session id>/transcript.jsonl  {round, role, content} per line
//   <root>/<session id>/dot.xml           reasoning graph
//   <root>/<session id>/audit.jsonl       execution attempts
//   <root>/<session id>/verdict.json      only for completed sessions
//
// Files are written to a temporary name and renamed into place.

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "cdiag/agent/session.hpp"

namespace cdiag::agent {

inline constexpr const char* kSessionFile = "session.json";
inline constexpr const char* kTranscriptFile = "transcript.jsonl";
inline constexpr const char* kDotFile = "dot.xml";
inline constexpr const char* kAuditFile = "audit.jsonl";
inline constexpr const char* kVerdictFile = "verdict.json";

class SessionStore {
 public:
  /// Creates the root directory when missing; IoError when that fails.
  explicit SessionStore(std::filesystem::path root);

  void save(const SelfPlaySession& session);

  /// Ids with a session.json, sorted.
  std::vector<std::string> list() const;
  /// NotFoundError for unknown ids.
  nlohmann::json load(std::string_view id) const;
  std::string read(std::string_view id, const char* file) const;

  std::filesystem::path dir_of(std::string_view id) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
};

}  // namespace cdiag::agent
