// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Single-process service: simulator, monitor, orchestrator, approval queue
// and benchmark runner behind one object. The HTTP layer maps routes onto
// these methods; tests drive them directly.
//
// A tick advances the simulated clock, polls the monitor, publishes alerts
// and a telemetry page, and starts a diagnosis session for each alert whose
// device has no session in flight.

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cdiag/agent/approval.hpp"
#include "cdiag/agent/backend.hpp"
#include "cdiag/agent/monitor.hpp"
#include "cdiag/agent/orchestrator.hpp"
#include "cdiag/agent/session_store.hpp"
#include "cdiag/bench/items.hpp"
#include "cdiag/gateway/config.hpp"
#include "cdiag/gateway/events.hpp"
#include "cdiag/kb/knowledge_base.hpp"
#include "cdiag/sim/cluster.hpp"
#include "json.hpp"

namespace cdiag::gateway {

class Service {
 public:
  /// Validates the config and loads every referenced file.
  explicit Service(ServiceConfig config);
  /// Same, with a caller-supplied session backend.
  Service(ServiceConfig config, std::unique_ptr<agent::Backend> backend);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Background ticking every tick_interval_ms.
  void start();
  /// Stops ticking, rejects pending approvals as "shutdown", joins sessions
  /// and closes event streams. Idempotent.
  void stop();

  std::vector<agent::Alert> tick();
  /// Blocks until no session is in flight or the timeout passes.
  bool wait_idle(std::chrono::milliseconds timeout);

  /// window_s in (0, 3600].
  nlohmann::json telemetry(double window_s) const;
  nlohmann::json alerts() const;
  nlohmann::json sessions() const;
  /// Session document plus "dot_xml". NotFoundError for unknown ids.
  nlohmann::json session(std::string_view id) const;
  nlohmann::json approvals(std::optional<agent::ApprovalStatus> status) const;
  nlohmann::json decide(std::string_view id, bool approve, const std::string& decider);
  /// {"kind","target","value","onset_s"?} injects one fault; {"drill":{...}}
  /// injects the gpu throttle and runs the calibrated job.
  nlohmann::json inject(const nlohmann::json& body);
  /// {"backend": "oracle"|"empty"|"service", "visibility", "rag", "rag_k"}
  /// over the configured items.
  nlohmann::json run_bench(const nlohmann::json& body);
  nlohmann::json health() const;

  EventBus& events() { return bus_; }
  std::shared_ptr<Subscription> subscribe() { return bus_.subscribe(config_.event_buffer); }
  const ServiceConfig& config() const { return config_; }
  sim::Cluster& cluster() { return *cluster_; }
  kb::KnowledgeBase& knowledge_base() { return *kb_; }
  agent::ApprovalRegistry& approval_registry() { return approvals_; }

 private:
  void on_session(const agent::SelfPlaySession& s);
  void launch(const agent::Alert& alert);
  void ticker();

  ServiceConfig config_;
  std::unique_ptr<sim::Cluster> cluster_;
  std::shared_ptr<kb::KnowledgeBase> kb_;
  std::unique_ptr<agent::Backend> backend_;
  std::vector<bench::BenchmarkItem> items_;
  agent::ApprovalRegistry approvals_;
  agent::SessionStore store_;
  agent::Monitor monitor_;
  EventBus bus_;
  std::unique_ptr<agent::Orchestrator> orchestrator_;

  std::mutex tick_mu_;
  std::mutex bench_mu_;

  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  std::map<std::string, agent::SelfPlaySession> sessions_;
  std::map<std::string, std::string> alert_session_;
  std::set<std::string> verdicts_published_;
  std::map<std::string, std::string> busy_devices_;  // device -> launching alert
  std::map<std::string, std::string> folded_;        // alert -> launching alert
  std::size_t in_flight_ = 0;
  std::vector<std::thread> workers_;
  bool stopping_ = false;

  std::atomic<bool> ticking_{false};
  std::thread ticker_;
  std::mutex ticker_mu_;
  std::condition_variable ticker_cv_;
};

}  // namespace cdiag::gateway
