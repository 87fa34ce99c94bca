// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/directives.hpp"

#include <algorithm>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/sim/checks.hpp"

namespace cdiag::agent {

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> lines_of(std::string_view reply) {
  std::vector<Line> out;
  std::size_t n = 1;
  for (auto& l : split(reply, '\n')) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    out.push_back({n++, std::move(l)});
  }
  return out;
}

// Value after "LABEL:" when the trimmed line starts with it (case-insensitive).
std::optional<std::string> labeled(std::string_view line, std::string_view label) {
  const auto t = trim(line);
  if (!starts_with_ci(t, label) || t.size() <= label.size() || t[label.size()] != ':') {
    return std::nullopt;
  }
  return std::string(trim(t.substr(label.size() + 1)));
}

std::size_t indent_of(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i;
}

std::vector<std::string> comma_list(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& part : split(s, ',')) {
    auto t = std::string(trim(part));
    if (t.empty() || std::find(out.begin(), out.end(), t) != out.end()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& msg) {
  throw ParseError(line, col, msg);
}

// Bracket directive starting at lines[i]; returns kind, body and advances i
// past the closing bracket.
std::pair<std::string, std::string> bracket(const std::vector<Line>& lines, std::size_t& i) {
  const auto& first = lines[i];
  const std::size_t col = indent_of(first.text) + 1;
  const auto open = first.text.substr(col - 1);
  const auto colon = open.find(':');
  if (colon == std::string::npos) fail(first.number, col, "directive needs '<kind>:'");
  const auto kind = to_lower(trim(std::string_view(open).substr(1, colon - 1)));
  if (kind != "tool" && kind != "script" && kind != "no-tool") {
    fail(first.number, col, "unknown directive '" + kind + "'");
  }
  std::string body = open.substr(colon + 1);
  while (true) {
    const auto close = body.find(']');
    if (close != std::string::npos) {
      if (!trim(std::string_view(body).substr(close + 1)).empty()) {
        fail(lines[i].number, col, "text after closing ']'");
      }
      body.resize(close);
      break;
    }
    if (kind != "script" || i + 1 >= lines.size()) {
      fail(first.number, col, "unterminated [" + kind + ": directive");
    }
    body += "\n" + lines[++i].text;
  }
  ++i;
  return {kind, std::string(trim(body))};
}

bool opens_bracket(const std::string& text) {
  const auto t = trim(text);
  return !t.empty() && t.front() == '[';
}

}  // namespace

std::vector<std::string> parse_keywords(std::string_view reply) {
  for (const auto& l : lines_of(reply)) {
    if (auto v = labeled(l.text, "KEYWORDS")) {
      auto out = comma_list(*v);
      if (out.empty()) fail(l.number, indent_of(l.text) + 1, "KEYWORDS: list is empty");
      return out;
    }
  }
  fail(1, 1, "no KEYWORDS: line");
}

PlanDirectives parse_plan(std::string_view reply) {
  const auto lines = lines_of(reply);
  PlanDirectives plan;
  std::size_t i = 0;
  while (i < lines.size()) {
    const auto& l = lines[i];
    const std::size_t col = indent_of(l.text) + 1;
    if (opens_bracket(l.text)) {
      const auto number = l.number;
      auto [kind, body] = bracket(lines, i);
      if (body.empty()) fail(number, col, "empty [" + kind + ": directive");
      if (kind == "tool") {
        auto words = split_whitespace(body);
        if (!sim::is_registered_tool(words.front())) {
          fail(number, col, "unknown tool '" + words.front() + "'");
        }
        plan.tools.push_back({words.front(), {words.begin() + 1, words.end()}});
      } else if (kind == "script") {
        plan.scripts.push_back({body, ""});
      } else {
        plan.no_tool_reason = body;
      }
      continue;
    }
    if (auto v = labeled(l.text, "INTENT")) {
      if (plan.scripts.empty() || !plan.scripts.back().intent.empty()) {
        fail(l.number, col, "INTENT: must follow a [script: directive");
      }
      plan.scripts.back().intent = *v;
    } else if (auto c = labeled(l.text, "CRITIQUE")) {
      if (c->empty()) fail(l.number, col, "CRITIQUE: is empty");
      plan.critiques.push_back({*c, std::nullopt});
    } else if (auto r = labeled(l.text, "REFINEMENT")) {
      if (plan.critiques.empty() || plan.critiques.back().refinement) {
        fail(l.number, col, "REFINEMENT: must follow a CRITIQUE:");
      }
      if (r->empty()) fail(l.number, col, "REFINEMENT: is empty");
      plan.critiques.back().refinement = *r;
    }
    ++i;
  }
  if (!plan.has_action()) {
    fail(lines.empty() ? 1 : lines.back().number, 1, "no [tool:, [script: or [no-tool: directive");
  }
  return plan;
}

VerdictDirectives parse_verdict(std::string_view reply) {
  const auto lines = lines_of(reply);
  VerdictDirectives v;
  bool have_cause = false, have_devices = false;
  std::size_t i = 0;
  while (i < lines.size()) {
    const auto& l = lines[i];
    const std::size_t col = indent_of(l.text) + 1;
    if (opens_bracket(l.text)) {
      const auto number = l.number;
      auto [kind, body] = bracket(lines, i);
      if (kind != "script") fail(number, col, "only [script: directives are allowed here");
      if (body.empty()) fail(number, col, "empty [script: directive");
      v.scripts.push_back({body, ""});
      continue;
    }
    if (auto s = labeled(l.text, "CAUSE")) {
      if (s->empty()) fail(l.number, col, "CAUSE: is empty");
      v.cause = *s;
      have_cause = true;
    } else if (auto d = labeled(l.text, "DEVICES")) {
      if (to_lower(*d) != "none") v.devices = comma_list(*d);
      have_devices = true;
    } else if (auto c = labeled(l.text, "CONFIDENCE")) {
      auto x = parse_double(*c);
      if (!x) fail(l.number, col, "CONFIDENCE: is not a number");
      v.confidence = *x;
    } else if (auto e = labeled(l.text, "EVIDENCE")) {
      v.evidence = comma_list(*e);
    } else if (auto r = labeled(l.text, "REMEDIATION")) {
      v.remediation = *r;
    } else if (auto in = labeled(l.text, "INTENT")) {
      if (v.scripts.empty() || !v.scripts.back().intent.empty()) {
        fail(l.number, col, "INTENT: must follow a [script: directive");
      }
      v.scripts.back().intent = *in;
    }
    ++i;
  }
  if (!have_cause) fail(1, 1, "no CAUSE: line");
  if (!have_devices) fail(1, 1, "no DEVICES: line");
  return v;
}

}  // namespace cdiag::agent
