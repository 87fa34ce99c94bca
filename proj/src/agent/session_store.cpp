// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/session_store.hpp"

#include <algorithm>
#include <cctype>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/dot/xml.hpp"

namespace cdiag::agent {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  write_file(tmp.string(), contents);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

bool valid_id(std::string_view id) {
  return !id.empty() && id != "." && id != ".." && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

}  // namespace

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoError("cannot create session store " + root_.string() + ": " + ec.message());
}

fs::path SessionStore::dir_of(std::string_view id) const {
  if (!valid_id(id)) throw MisuseError("invalid session id '" + std::string(id) + "'");
  return root_ / std::string(id);
}

void SessionStore::save(const SelfPlaySession& s) {
  const auto dir = dir_of(s.id);
  std::lock_guard lock(mu_);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::string audit;
  for (const auto& e : s.audit) audit += to_json(e).dump() + "\n";
  write_atomic(dir / kTranscriptFile, s.transcript_jsonl());
  write_atomic(dir / kDotFile, dot::serialize(s.graph));
  write_atomic(dir / kAuditFile, audit);
  if (s.verdict) {
    write_atomic(dir / kVerdictFile, to_json(*s.verdict).dump(2) + "\n");
  } else {
    fs::remove(dir / kVerdictFile, ec);
  }
  // session.json last: its presence marks a complete directory.
  write_atomic(dir / kSessionFile, to_json(s).dump(2) + "\n");
}

std::vector<std::string> SessionStore::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory() && fs::exists(entry.path() / kSessionFile)) {
      out.push_back(entry.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string SessionStore::read(std::string_view id, const char* file) const {
  const auto path = dir_of(id) / file;
  std::lock_guard lock(mu_);
  if (!fs::exists(dir_of(id) / kSessionFile)) {
    throw NotFoundError("session " + std::string(id) + " not found");
  }
  if (!fs::exists(path)) throw NotFoundError(path.string() + " not found");
  return read_file(path.string());
}

nlohmann::json SessionStore::load(std::string_view id) const {
  return nlohmann::json::parse(read(id, kSessionFile));
}

}  // namespace cdiag::agent
