// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/gateway/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "cdiag/bench/harness.hpp"
#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/sim/checks.hpp"

namespace cdiag::gateway {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& at) {
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw MisuseError("config: unknown key " + at + k);
  }
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw MisuseError(std::string("config: ") + key + " has the wrong type");
  }
}

}  // namespace

ServiceConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw MisuseError("config: not an object");
  reject_unknown(
      j,
      {"listen", "backend", "topology", "corpus", "bench_items", "session_dir", "whitelist",
       "approval_timeout_s", "wall_seconds_per_sim_second", "seeds", "heldout_fraction",
       "sim_seconds_per_tick", "tick_interval_ms", "auto_diagnose", "event_buffer"},
      "");
  ServiceConfig c;
  if (j.contains("listen")) {
    const json& l = j.at("listen");
    reject_unknown(l, {"host", "port"}, "listen.");
    read_into(l, "host", c.host);
    read_into(l, "port", c.port);
  }
  if (j.contains("backend")) {
    const json& b = j.at("backend");
    reject_unknown(b, {"kind", "fixture", "base_url", "path", "model", "token", "timeout_s"},
                   "backend.");
    read_into(b, "kind", c.backend.kind);
    read_into(b, "fixture", c.backend.fixture_path);
    c.backend.fixture_path = resolve(base_dir, c.backend.fixture_path);
    read_into(b, "base_url", c.backend.remote.base_url);
    read_into(b, "path", c.backend.remote.path);
    read_into(b, "model", c.backend.remote.model);
    read_into(b, "token", c.backend.remote.token);
    read_into(b, "timeout_s", c.backend.remote.timeout_s);
  }
  read_into(j, "topology", c.topology_path);
  read_into(j, "corpus", c.corpus_path);
  read_into(j, "bench_items", c.bench_items_path);
  read_into(j, "session_dir", c.session_dir);
  c.topology_path = resolve(base_dir, c.topology_path);
  c.corpus_path = resolve(base_dir, c.corpus_path);
  c.bench_items_path = resolve(base_dir, c.bench_items_path);
  c.session_dir = resolve(base_dir, c.session_dir);
  read_into(j, "whitelist", c.whitelist);
  read_into(j, "approval_timeout_s", c.approval_timeout_s);
  read_into(j, "wall_seconds_per_sim_second", c.wall_seconds_per_sim_second);
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    reject_unknown(s, {"cluster", "split"}, "seeds.");
    read_into(s, "cluster", c.cluster_seed);
    read_into(s, "split", c.split_seed);
  }
  read_into(j, "heldout_fraction", c.heldout_fraction);
  read_into(j, "sim_seconds_per_tick", c.sim_seconds_per_tick);
  read_into(j, "tick_interval_ms", c.tick_interval_ms);
  read_into(j, "auto_diagnose", c.auto_diagnose);
  read_into(j, "event_buffer", c.event_buffer);
  return c;
}

void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env) {
  if (auto port = env("CDIAG_PORT")) {
    const auto p = parse_int(*port);
    if (!p) throw MisuseError("CDIAG_PORT: not an integer: " + *port);
    cfg.port = static_cast<int>(*p);
  }
  if (auto url = env("CDIAG_BACKEND_ENDPOINT")) {
    cfg.backend.kind = "remote";
    cfg.backend.remote.base_url = *url;
  }
  if (auto model = env("CDIAG_BACKEND_MODEL")) cfg.backend.remote.model = *model;
  if (auto token = env("CDIAG_BACKEND_TOKEN")) cfg.backend.remote.token = *token;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

void validate(const ServiceConfig& c) {
  if (c.port < 0 || c.port > 65535) throw MisuseError("config: port out of range");
  const auto need_file = [](const std::string& what, const std::string& p) {
    if (p.empty()) throw MisuseError("config: " + what + " path is required");
    if (!fs::is_regular_file(p)) throw MisuseError("config: " + what + " not found: " + p);
  };
  need_file("topology", c.topology_path);
  need_file("corpus", c.corpus_path);
  if (!c.bench_items_path.empty()) need_file("bench_items", c.bench_items_path);
  if (c.session_dir.empty()) throw MisuseError("config: session_dir is required");
  if (c.backend.kind == "scripted") {
    need_file("backend fixture", c.backend.fixture_path);
  } else if (c.backend.kind == "remote") {
    if (c.backend.remote.base_url.empty() || c.backend.remote.model.empty()) {
      throw MisuseError("config: remote backend needs base_url and model");
    }
  } else if (c.backend.kind != "empty") {
    throw MisuseError("config: unknown backend kind " + c.backend.kind);
  }
  const auto& tools = sim::tool_names();
  for (const auto& w : c.whitelist) {
    if (std::find(tools.begin(), tools.end(), w) == tools.end()) {
      throw MisuseError("config: whitelist names unknown tool " + w);
    }
  }
  if (c.approval_timeout_s <= 0 || c.wall_seconds_per_sim_second <= 0) {
    throw MisuseError("config: approval timeout and its wall scale must be positive");
  }
  if (c.heldout_fraction <= 0 || c.heldout_fraction >= 1) {
    throw MisuseError("config: heldout_fraction must be in (0, 1)");
  }
  if (c.sim_seconds_per_tick <= 0 || c.tick_interval_ms <= 0) {
    throw MisuseError("config: tick settings must be positive");
  }
  if (c.event_buffer == 0) throw MisuseError("config: event_buffer must be positive");
}

ServiceConfig load_service_config(const std::string& path, const EnvLookup& env) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw MisuseError("config " + path + ": " + e.what());
  }
  auto base = fs::path(path).parent_path().string();
  ServiceConfig c = config_from_json(j, base.empty() ? "." : base);
  apply_env_overrides(c, env);
  validate(c);
  return c;
}

std::unique_ptr<agent::Backend> make_backend(const BackendSelection& sel) {
  if (sel.kind == "scripted") return agent::load_scripted_backend(sel.fixture_path);
  if (sel.kind == "remote") return std::make_unique<agent::RemoteBackend>(sel.remote);
  if (sel.kind == "empty") return agent::empty_backend();
  throw MisuseError("unknown backend kind " + sel.kind);
}

std::unique_ptr<agent::Backend> make_bench_backend(const std::string& name,
                                                   const std::vector<bench::BenchmarkItem>& items) {
  if (name == "oracle") return std::make_unique<bench::OracleBackend>(items);
  if (name == "empty") return agent::empty_backend();
  if (fs::is_regular_file(name)) return agent::load_scripted_backend(name);
  throw MisuseError("unknown backend '" + name + "': expected oracle, empty or a fixture path");
}

}  // namespace cdiag::gateway
