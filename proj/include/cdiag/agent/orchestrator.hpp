// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Three-round self-play diagnosis:
//
//   round 1  keywords from the alert evidence, knowledge-base retrieval
//   round 2  self-review (critique/refinement) and tool planning, then
//            approvals and execution
//   round 3  attribution verdict, optional remediation script (approved and
//            executed before the session closes)
//
// A reply that does not parse gets one retry exchange; a second failure ends
// the session with RoundFailed. Backend errors fail the round at once.

#include <atomic>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdiag/agent/approval.hpp"
#include "cdiag/agent/backend.hpp"
#include "cdiag/agent/monitor.hpp"
#include "cdiag/agent/session.hpp"
#include "cdiag/agent/session_store.hpp"
#include "cdiag/kb/knowledge_base.hpp"
#include "cdiag/sim/checks.hpp"
#include "cdiag/sim/cluster.hpp"

namespace cdiag::agent {

class RoundFailed : public std::runtime_error {
 public:
  RoundFailed(int round, const std::string& message);
  int round() const noexcept { return round_; }

 private:
  int round_;
};

struct SessionConfig {
  std::size_t retrieval_k = 5;
  kb::Visibility visibility = kb::Visibility::Full;
  std::vector<std::string> whitelist = sim::tool_names();
  double approval_timeout_s = 1800;  // simulated
  // Real time a waiter blocks per simulated second of approval timeout.
  double wall_seconds_per_sim_second = 1e-3;
  std::size_t dot_budget = 64;
  double telemetry_window_s = 60;
  sim::CheckOptions check_options;
};

/// System directive sent with every completion.
extern const char* const kSystemDirective;

class Orchestrator {
 public:
  using Listener = std::function<void(const SelfPlaySession&)>;

  Orchestrator(sim::Cluster& cluster, Backend& backend, kb::KnowledgeBase& kb,
               ApprovalRegistry& approvals, SessionConfig config = {},
               SessionStore* store = nullptr);

  /// Full session; always persisted (when a store is set) and never throws
  /// for round or safety failures, which are recorded in the status.
  SelfPlaySession run_session(const Alert& alert);

  // Individual steps. Round steps throw RoundFailed; execution throws
  // SafetyViolation and marks the session SafetyHalted.
  SelfPlaySession open(const Alert& alert);
  void round1_extract(SelfPlaySession& s);
  void round2_plan(SelfPlaySession& s);
  void await_approvals(SelfPlaySession& s, int round);
  void execute_round(SelfPlaySession& s, int round);
  void round3_attribute(SelfPlaySession& s);
  /// Appends the knowledge record for completed sessions, then persists.
  void close(SelfPlaySession& s);

  ExecutionResult execute(SelfPlaySession& s, ToolInvocation& inv);

  void add_listener(Listener listener);
  const SessionConfig& config() const { return config_; }
  bool whitelisted(std::string_view tool) const;

 private:
  std::string ask(SelfPlaySession& s, RoundRecord& r, std::string prompt);
  RoundRecord& round_record(SelfPlaySession& s, int round);
  std::string& add_invocation(SelfPlaySession& s, RoundRecord& r, ToolInvocation inv);
  void publish(const SelfPlaySession& s);
  std::string results_summary(const SelfPlaySession& s) const;
  std::string decisive_tool(const SelfPlaySession& s) const;
  ExecutionResult dispatch_registry(const ToolInvocation& inv) const;

  sim::Cluster& cluster_;
  Backend& backend_;
  kb::KnowledgeBase& kb_;
  ApprovalRegistry& approvals_;
  SessionConfig config_;
  SessionStore* store_;
  std::atomic<std::uint64_t> next_session_{1};
  std::mutex listeners_mu_;
  std::vector<Listener> listeners_;
};

}  // namespace cdiag::agent
