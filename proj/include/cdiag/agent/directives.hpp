// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Line grammar of backend replies. Directives start a line:
//
//   KEYWORDS: gpu frequency throttle, power drop
//   CRITIQUE: <text>
//   REFINEMENT: <text>           (must follow a CRITIQUE)
//   [tool: <name> <args...>]     (one line)
//   [script: <statements>]       (may span lines up to the closing ']')
//   INTENT: <text>               (declared purpose of the preceding script)
//   [no-tool: <reason>]
//   CAUSE: / DEVICES: / CONFIDENCE: / EVIDENCE: / REMEDIATION:
//
// Other lines are free text and ignored. Malformed directives throw
// ParseError with the 1-based line and column.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdiag::agent {

struct ToolDirective {
  std::string name;
  std::vector<std::string> args;
  bool operator==(const ToolDirective&) const = default;
};

struct ScriptDirective {
  std::string source;
  std::string intent;
  bool operator==(const ScriptDirective&) const = default;
};

struct CritiqueDirective {
  std::string critique;
  std::optional<std::string> refinement;
};

struct PlanDirectives {
  std::vector<CritiqueDirective> critiques;
  std::vector<ToolDirective> tools;
  std::vector<ScriptDirective> scripts;
  std::optional<std::string> no_tool_reason;

  bool has_action() const { return !tools.empty() || !scripts.empty() || no_tool_reason; }
};

struct VerdictDirectives {
  std::string cause;
  std::vector<std::string> devices;
  std::optional<double> confidence;  // as written, unclamped
  std::vector<std::string> evidence;
  std::string remediation;
  std::vector<ScriptDirective> scripts;
};

/// Keywords from the first KEYWORDS: line, trimmed, deduplicated, case kept.
std::vector<std::string> parse_keywords(std::string_view reply);

/// Requires at least one tool, script or no-tool directive. Tool names must
/// be registered tools.
PlanDirectives parse_plan(std::string_view reply);

/// Requires CAUSE and DEVICES (a comma-separated list, or "none").
VerdictDirectives parse_verdict(std::string_view reply);

}  // namespace cdiag::agent
