// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Chat-completion client:
//   POST <base_url><path> {"model": ..., "messages": [{"role", "content"}, ...]}
//   -> {"choices": [{"message": {"content": "..."}}]}
// The system directive and the rendered reasoning graph travel as the first
// (system) message.

#include <string>

#include "cdiag/agent/backend.hpp"

namespace cdiag::agent {

struct RemoteConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string token;  // sent as "Authorization: Bearer <token>" when non-empty
  double timeout_s = 60;
};

nlohmann::json chat_payload(const std::string& model, const CompletionRequest& request);
/// Throws BackendError when the body lacks choices[0].message.content.
std::string parse_chat_response(std::string_view body);

class RemoteBackend : public Backend {
 public:
  /// Throws MisuseError for an empty base URL or model, or a non-positive timeout.
  explicit RemoteBackend(RemoteConfig config);

  std::string name() const override { return "remote:" + config_.model; }
  std::string complete(const CompletionRequest& request) override;

  const RemoteConfig& config() const { return config_; }

 private:
  RemoteConfig config_;
};

}  // namespace cdiag::agent
