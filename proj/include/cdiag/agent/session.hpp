// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Self-play session records and the process-wide execution audit.

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdiag/agent/approval.hpp"
#include "cdiag/agent/backend.hpp"
#include "cdiag/agent/monitor.hpp"
#include "cdiag/dot/graph.hpp"
#include "cdiag/kb/index.hpp"
#include "json.hpp"

namespace cdiag::agent {

/// An invocation reached execution without being whitelisted or approved.
class SafetyViolation : public std::runtime_error {
 public:
  explicit SafetyViolation(const std::string& what) : std::runtime_error(what) {}
};

enum class InvocationKind { Registry, Script };
enum class WhitelistStatus { Whitelisted, NeedsApproval };

std::string_view to_string(InvocationKind k);
std::string_view to_string(WhitelistStatus s);

struct ExecutionResult {
  bool ok = false;     // ran to completion
  bool pass = true;    // registry checks: the check passed
  std::string output;  // check evidence or script output
  std::vector<std::string> failing_devices;
};

struct ToolInvocation {
  std::string id;  // "t-1", "t-2", ... within a session
  InvocationKind kind = InvocationKind::Registry;
  std::string name;  // registry tool; "script" for scripts
  std::vector<std::string> args;
  std::string script;
  std::string intent;
  WhitelistStatus status = WhitelistStatus::Whitelisted;
  std::string approval_id;
  int round = 0;
  bool remediation = false;
  bool executed = false;
  std::string skipped;  // reason when not executed
  std::optional<ExecutionResult> result;
  std::optional<std::uint32_t> evidence_node;
};

struct Exchange {
  std::string prompt;
  std::string response;
  bool operator==(const Exchange&) const = default;
};

struct RoundRecord {
  int round = 0;
  std::vector<Exchange> exchanges;
  std::vector<std::uint32_t> dot_nodes;
  std::vector<std::string> keywords;
  std::vector<kb::RetrievalHit> hits;
  std::vector<std::string> invocations;  // ids planned in this round
  std::vector<std::string> notes;
};

struct AttributionVerdict {
  std::string cause;
  std::vector<std::string> devices;
  double confidence = 0.5;
  std::vector<std::string> evidence;  // "t-N" invocation ids or "node:N" graph ids
  std::string remediation;
  std::uint32_t dot_node = 0;
};

struct AuditEntry {
  std::string session_id;
  std::string invocation_id;
  InvocationKind kind = InvocationKind::Registry;
  std::string name;
  std::string approval_id;
  std::string approval_status;  // at execution time; "" for whitelisted tools
  bool executed = false;        // false: blocked as a safety violation
  std::string detail;
};

enum class SessionStatus { Running, Completed, RoundFailed, SafetyHalted };

std::string_view to_string(SessionStatus s);

struct SelfPlaySession {
  std::string id;
  Alert alert;
  SessionStatus status = SessionStatus::Running;
  int failed_round = 0;
  std::string failure;
  std::vector<RoundRecord> rounds;
  dot::Graph graph;
  std::vector<ToolInvocation> invocations;
  std::vector<std::string> keywords;  // current set after self-review
  std::optional<std::uint32_t> keyword_node;
  std::optional<std::string> no_tool_reason;
  std::optional<AttributionVerdict> verdict;
  std::optional<std::uint32_t> appended_record;
  std::size_t test_cases = 0;     // distinct diagnostic registry checks executed
  std::vector<AuditEntry> audit;  // this session's execution attempts

  ToolInvocation* invocation(std::string_view id);
  const ToolInvocation* invocation(std::string_view id) const;
  /// Prompts and replies in order, one {round, role, content} per line.
  std::string transcript_jsonl() const;
};

nlohmann::json to_json(const Alert& a);
nlohmann::json to_json(const ApprovalRequest& r);
nlohmann::json to_json(const ToolInvocation& t);
nlohmann::json to_json(const AttributionVerdict& v);
/// Everything except the graph, which is stored as XML.
nlohmann::json to_json(const SelfPlaySession& s);

nlohmann::json to_json(const AuditEntry& e);

/// Every execution attempt in the process, allowed or blocked.
class ExecutionAudit {
 public:
  void record(AuditEntry e);
  std::vector<AuditEntry> entries() const;
  std::vector<AuditEntry> for_session(std::string_view session_id) const;
  /// Executed scripts whose approval was not "approved" at execution time.
  std::vector<AuditEntry> unapproved_script_executions() const;

 private:
  mutable std::mutex mu_;
  std::vector<AuditEntry> entries_;
};

ExecutionAudit& execution_audit();

}  // namespace cdiag::agent
