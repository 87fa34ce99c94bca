// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/session.hpp"

namespace cdiag::agent {

std::string_view to_string(InvocationKind k) {
  return k == InvocationKind::Registry ? "registry" : "script";
}

std::string_view to_string(WhitelistStatus s) {
  return s == WhitelistStatus::Whitelisted ? "whitelisted" : "needs_approval";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::Completed: return "completed";
    case SessionStatus::RoundFailed: return "round_failed";
    case SessionStatus::SafetyHalted: return "safety_halted";
  }
  return "?";
}

ToolInvocation* SelfPlaySession::invocation(std::string_view id) {
  for (auto& t : invocations) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const ToolInvocation* SelfPlaySession::invocation(std::string_view id) const {
  return const_cast<SelfPlaySession*>(this)->invocation(id);
}

std::string SelfPlaySession::transcript_jsonl() const {
  std::string out;
  for (const auto& r : rounds) {
    for (const auto& e : r.exchanges) {
      out += nlohmann::json{{"round", r.round}, {"role", "user"}, {"content", e.prompt}}.dump();
      out += '\n';
      out +=
          nlohmann::json{{"round", r.round}, {"role", "assistant"}, {"content", e.response}}.dump();
      out += '\n';
    }
  }
  return out;
}

nlohmann::json to_json(const Alert& a) {
  return {{"id", a.id},   {"source", to_string(a.source)}, {"device", a.device},
          {"job", a.job}, {"evidence", a.evidence},        {"raised_at_s", a.raised_at_s}};
}

nlohmann::json to_json(const ApprovalRequest& r) {
  nlohmann::json j{{"id", r.id},
                   {"session_id", r.session_id},
                   {"script", r.script},
                   {"intent", r.intent},
                   {"status", to_string(r.status)},
                   {"decider", r.decider},
                   {"requested_at_s", r.requested_at_s},
                   {"decided_at_s", nullptr}};
  if (r.decided_at_s) j["decided_at_s"] = *r.decided_at_s;
  return j;
}

nlohmann::json to_json(const ToolInvocation& t) {
  nlohmann::json j{{"id", t.id},
                   {"kind", to_string(t.kind)},
                   {"name", t.name},
                   {"args", t.args},
                   {"status", to_string(t.status)},
                   {"round", t.round},
                   {"remediation", t.remediation},
                   {"executed", t.executed}};
  if (t.kind == InvocationKind::Script) {
    j["script"] = t.script;
    j["intent"] = t.intent;
  }
  if (!t.approval_id.empty()) j["approval_id"] = t.approval_id;
  if (!t.skipped.empty()) j["skipped"] = t.skipped;
  if (t.result) {
    j["result"] = {{"ok", t.result->ok},
                   {"pass", t.result->pass},
                   {"output", t.result->output},
                   {"failing_devices", t.result->failing_devices}};
  }
  if (t.evidence_node) j["evidence_node"] = *t.evidence_node;
  return j;
}

nlohmann::json to_json(const AttributionVerdict& v) {
  return {{"cause", v.cause},       {"devices", v.devices},         {"confidence", v.confidence},
          {"evidence", v.evidence}, {"remediation", v.remediation}, {"dot_node", v.dot_node}};
}

nlohmann::json to_json(const SelfPlaySession& s) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : s.rounds) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : r.hits) {
      hits.push_back(
          {{"record_id", h.record_id}, {"score", h.score}, {"matched_terms", h.matched_terms}});
    }
    nlohmann::json exchanges = nlohmann::json::array();
    for (const auto& e : r.exchanges)
      exchanges.push_back({{"prompt", e.prompt}, {"response", e.response}});
    rounds.push_back({{"round", r.round},
                      {"exchanges", exchanges},
                      {"dot_nodes", r.dot_nodes},
                      {"keywords", r.keywords},
                      {"hits", hits},
                      {"invocations", r.invocations},
                      {"notes", r.notes}});
  }
  nlohmann::json invocations = nlohmann::json::array();
  for (const auto& t : s.invocations) invocations.push_back(to_json(t));
  nlohmann::json j{{"id", s.id},
                   {"alert", to_json(s.alert)},
                   {"status", to_string(s.status)},
                   {"failed_round", s.failed_round},
                   {"failure", s.failure},
                   {"rounds", rounds},
                   {"invocations", invocations},
                   {"keywords", s.keywords},
                   {"no_tool_reason", nullptr},
                   {"verdict", nullptr},
                   {"appended_record", nullptr},
                   {"test_cases", s.test_cases},
                   {"dot_nodes", s.graph.size()}};
  if (s.no_tool_reason) j["no_tool_reason"] = *s.no_tool_reason;
  if (s.verdict) j["verdict"] = to_json(*s.verdict);
  if (s.appended_record) j["appended_record"] = *s.appended_record;
  return j;
}

nlohmann::json to_json(const AuditEntry& e) {
  return {{"session_id", e.session_id},   {"invocation_id", e.invocation_id},
          {"kind", to_string(e.kind)},    {"name", e.name},
          {"approval_id", e.approval_id}, {"approval_status", e.approval_status},
          {"executed", e.executed},       {"detail", e.detail}};
}

void ExecutionAudit::record(AuditEntry e) {
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(e));
}

std::vector<AuditEntry> ExecutionAudit::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<AuditEntry> ExecutionAudit::for_session(std::string_view session_id) const {
  std::lock_guard lock(mu_);
  std::vector<AuditEntry> out;
  for (const auto& e : entries_) {
    if (e.session_id == session_id) out.push_back(e);
  }
  return out;
}

std::vector<AuditEntry> ExecutionAudit::unapproved_script_executions() const {
  std::lock_guard lock(mu_);
  std::vector<AuditEntry> out;
  for (const auto& e : entries_) {
    if (e.kind == InvocationKind::Script && e.executed && e.approval_status != "approved") {
      out.push_back(e);
    }
  }
  return out;
}

ExecutionAudit& execution_audit() {
  static ExecutionAudit audit;
  return audit;
}

}  // namespace cdiag::agent
