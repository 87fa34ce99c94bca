// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/remote_backend.hpp"

#include <cmath>

#include "cdiag/common/error.hpp"
#include "httplib.h"

namespace cdiag::agent {

nlohmann::json chat_payload(const std::string& model, const CompletionRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  std::string system = request.system;
  if (!request.dot_context.empty()) {
    if (!system.empty()) system += "\n\n";
    system += request.dot_context;
  }
  if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
  for (const auto& t : request.turns)
    messages.push_back({{"role", t.role}, {"content", t.content}});
  return {{"model", model}, {"messages", messages}};
}

std::string parse_chat_response(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError("backend reply is not JSON");
  }
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return "";
    return content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError("backend reply lacks choices[0].message.content");
  }
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw MisuseError("remote backend: base_url is empty");
  if (config_.model.empty()) throw MisuseError("remote backend: model is empty");
  if (!(config_.timeout_s > 0)) throw MisuseError("remote backend: timeout must be positive");
}

std::string RemoteBackend::complete(const CompletionRequest& request) {
  httplib::Client client(config_.base_url);
  if (!client.is_valid())
    throw BackendError("remote backend: unusable base_url " + config_.base_url);
  const auto secs = static_cast<time_t>(std::floor(config_.timeout_s));
  const auto usecs = static_cast<time_t>((config_.timeout_s - std::floor(config_.timeout_s)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  const auto body = chat_payload(config_.model, request).dump();
  auto res = client.Post(config_.path, headers, body, "application/json");
  if (!res) {
    throw BackendError("remote backend: request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("remote backend: HTTP " + std::to_string(res->status));
  }
  return parse_chat_response(res->body);
}

}  // namespace cdiag::agent
