// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdiag/agent/backend.hpp"
#include "cdiag/agent/remote_backend.hpp"
#include "cdiag/bench/items.hpp"
#include "json.hpp"

namespace cdiag::gateway {

/// kind: "scripted" (fixture_path), "remote" (remote) or "empty".
struct BackendSelection {
  std::string kind = "scripted";
  std::string fixture_path;
  agent::RemoteConfig remote;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  BackendSelection backend;
  std::string topology_path;
  std::string corpus_path;
  std::string bench_items_path;
  std::string session_dir;
  std::vector<std::string> whitelist;  // empty: every registered tool
  double approval_timeout_s = 1800;    // simulated
  double wall_seconds_per_sim_second = 1.0;
  std::uint64_t cluster_seed = 0;
  std::uint64_t split_seed = 7;
  double heldout_fraction = 0.2;
  double sim_seconds_per_tick = 1.0;
  int tick_interval_ms = 250;
  bool auto_diagnose = true;
  std::size_t event_buffer = 256;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
ServiceConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
/// CDIAG_PORT, CDIAG_BACKEND_ENDPOINT (switches to the remote backend),
/// CDIAG_BACKEND_MODEL and CDIAG_BACKEND_TOKEN.
void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env);
std::optional<std::string> process_env(const std::string& name);

/// MisuseError naming the first problem: port range, missing paths, backend.
void validate(const ServiceConfig& cfg);

/// Reads, applies the process environment and validates.
ServiceConfig load_service_config(const std::string& path, const EnvLookup& env = process_env);

std::unique_ptr<agent::Backend> make_backend(const BackendSelection& sel);

/// "oracle", "empty", or a scripted fixture path.
std::unique_ptr<agent::Backend> make_bench_backend(const std::string& name,
                                                   const std::vector<bench::BenchmarkItem>& items);

}  // namespace cdiag::gateway
