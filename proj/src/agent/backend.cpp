// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/backend.hpp"

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::agent {

std::string_view CompletionRequest::last_user() const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return {};
}

ScriptedBackend::ScriptedBackend(std::string name, std::vector<FixtureEntry> entries, bool strict)
    : name_(std::move(name)), entries_(std::move(entries)), strict_(strict) {
  compiled_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.match.empty()) throw MisuseError("fixture " + std::to_string(i) + ": empty match");
    if (e.pattern) {
      try {
        compiled_.emplace_back(e.match, std::regex::ECMAScript);
      } catch (const std::regex_error& err) {
        throw MisuseError("fixture " + std::to_string(i) + ": bad pattern: " + err.what());
      }
    } else {
      compiled_.emplace_back();
    }
  }
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  const std::string prompt(request.last_user());
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const bool hit = e.pattern ? std::regex_search(prompt, compiled_[i])
                               : prompt.find(e.match) != std::string::npos;
    if (hit) return e.response;
  }
  {
    std::lock_guard lock(mu_);
    ++misses_;
  }
  if (strict_) {
    const auto first_line = prompt.substr(0, prompt.find('\n'));
    throw BackendError("scripted backend " + name_ + ": no fixture matches prompt '" + first_line +
                       "'");
  }
  return "";
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedBackend::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::unique_ptr<ScriptedBackend> scripted_backend_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw MisuseError("fixture file: expected an object");
  if (!j.contains("entries") || !j["entries"].is_array()) {
    throw MisuseError("fixture file: entries: missing field");
  }
  std::vector<FixtureEntry> entries;
  std::size_t i = 0;
  for (const auto& e : j["entries"]) {
    const auto where = "entries[" + std::to_string(i++) + "]";
    if (!e.is_object() || !e.contains("match") || !e["match"].is_string()) {
      throw MisuseError(where + ".match: missing field");
    }
    if (!e.contains("response") || !e["response"].is_string()) {
      throw MisuseError(where + ".response: missing field");
    }
    entries.push_back({e["match"].get<std::string>(), e.value("pattern", false),
                       e["response"].get<std::string>()});
  }
  return std::make_unique<ScriptedBackend>(j.value("name", std::string("scripted")),
                                           std::move(entries), j.value("strict", true));
}

std::unique_ptr<ScriptedBackend> load_scripted_backend(const std::string& path) {
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MisuseError(path + ": " + e.what());
  }
  return scripted_backend_from_json(j);
}

std::unique_ptr<ScriptedBackend> empty_backend() {
  return std::make_unique<ScriptedBackend>("empty", std::vector<FixtureEntry>{}, false);
}

}  // namespace cdiag::agent
