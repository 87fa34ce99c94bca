// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/dot/graph.hpp"

#include <algorithm>

namespace cdiag::dot {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Proposition: return "proposition";
    case Role::Critique: return "critique";
    case Role::Refinement: return "refinement";
    case Role::Verification: return "verification";
  }
  return "unknown";
}

std::string_view tag_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::PlainText: return "text";
    case SegmentKind::Symbol: return "symbol";
    case SegmentKind::Code: return "code";
    case SegmentKind::Formula: return "formula";
    case SegmentKind::Rule: return "rule";
  }
  return "unknown";
}

std::optional<Role> role_from_string(std::string_view s) {
  for (auto r : {Role::Proposition, Role::Critique, Role::Refinement, Role::Verification})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

std::optional<SegmentKind> segment_kind_from_tag(std::string_view s) {
  for (auto k : {SegmentKind::PlainText, SegmentKind::Symbol, SegmentKind::Code,
                 SegmentKind::Formula, SegmentKind::Rule})
    if (tag_name(k) == s) return k;
  return std::nullopt;
}

std::string grammar_violation(const Graph& g, Role role, const std::vector<Segment>& content,
                              std::optional<std::uint32_t> target, std::uint32_t as_id) {
  if (content.empty()) return "content must be non-empty";
  if (role == Role::Proposition) {
    return target ? "proposition takes no target" : "";
  }
  if (!target) return std::string(to_string(role)) + " requires a target";
  if (*target >= as_id || *target >= g.size()) return "target must be an earlier node";
  const Role t = g.nodes()[*target].role;
  switch (role) {
    case Role::Critique:
      if (t != Role::Proposition && t != Role::Refinement) {
        return "critique must target proposition or refinement";
      }
      break;
    case Role::Refinement:
      if (t != Role::Critique) return "refinement must target critique";
      break;
    case Role::Verification:
      if (t != Role::Proposition && t != Role::Refinement) {
        return "verification must target proposition or refinement";
      }
      break;
    default:
      break;
  }
  return {};
}

std::uint32_t Graph::add_node(Role role, std::vector<Segment> content,
                              std::optional<std::uint32_t> target) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  const auto why = grammar_violation(*this, role, content, target, id);
  if (!why.empty()) throw GrammarError(why);
  nodes_.push_back({id, role, std::move(content), target});
  return id;
}

std::uint32_t Graph::propose(std::string text) {
  return add_node(Role::Proposition, {{SegmentKind::PlainText, std::move(text)}});
}

std::uint32_t Graph::critique(std::uint32_t target, std::string text) {
  return add_node(Role::Critique, {{SegmentKind::PlainText, std::move(text)}}, target);
}

std::uint32_t Graph::refine(std::uint32_t target, std::string text) {
  return add_node(Role::Refinement, {{SegmentKind::PlainText, std::move(text)}}, target);
}

std::uint32_t Graph::verify(std::uint32_t target, std::string text) {
  return add_node(Role::Verification, {{SegmentKind::PlainText, std::move(text)}}, target);
}

const Node& Graph::node(std::uint32_t id) const {
  if (id >= nodes_.size()) throw NotFoundError("no node " + std::to_string(id));
  return nodes_[id];
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (const auto& n : nodes_) {
    if (!n.target) continue;
    std::string_view label = n.role == Role::Critique     ? "critiques"
                             : n.role == Role::Refinement ? "refines"
                                                          : "verifies";
    out.push_back({n.id, *n.target, label});
  }
  return out;
}

Graph Graph::unchecked(std::vector<Node> nodes) {
  Graph g;
  g.nodes_ = std::move(nodes);
  return g;
}

namespace {

// Per-node grammar verdicts, each node checked against the nodes before it.
std::vector<std::string> violations_by_node(const Graph& g) {
  const auto& ns = g.nodes();
  std::vector<std::string> out(ns.size());
  std::vector<Node> prefix;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i].id != i) {
      out[i] = "node ids must equal creation order";
    } else {
      out[i] = grammar_violation(Graph::unchecked(prefix), ns[i].role, ns[i].content, ns[i].target,
                                 static_cast<std::uint32_t>(i));
    }
    prefix.push_back(ns[i]);
  }
  return out;
}

// A node takes part in acceptance only if it and everything it points at conform.
std::vector<bool> conforming(const Graph& g) {
  const auto why = violations_by_node(g);
  std::vector<bool> ok(why.size(), false);
  for (std::size_t i = 0; i < why.size(); ++i) {
    const auto& t = g.nodes()[i].target;
    ok[i] = why[i].empty() && (!t || ok[*t]);
  }
  return ok;
}

struct Status {
  std::vector<bool> accepted;
  std::vector<bool> has_critique;
};

Status evaluate(const Graph& g) {
  const auto& ns = g.nodes();
  const auto ok = conforming(g);
  const std::size_t n = ns.size();
  std::vector<bool> verified(n, false), accepted(n, false), answered(n, false), resolved(n, false);
  std::vector<bool> has_critique(n, false), all_answered(n, true), any_answered(n, false);
  std::vector<bool> any_resolved_refinement(n, false);
  // Dependencies always point to later nodes, so one reverse sweep settles them.
  for (std::size_t k = n; k-- > 0;) {
    if (!ok[k]) continue;
    const Node& x = ns[k];
    switch (x.role) {
      case Role::Proposition:
        accepted[k] = verified[k] && all_answered[k];
        break;
      case Role::Refinement:
        accepted[k] = verified[k] && all_answered[k];
        resolved[k] = accepted[k] || any_answered[k];
        if (resolved[k]) any_resolved_refinement[*x.target] = true;
        break;
      case Role::Critique:
        answered[k] = any_resolved_refinement[k];
        has_critique[*x.target] = true;
        if (!answered[k]) all_answered[*x.target] = false;
        if (answered[k]) any_answered[*x.target] = true;
        break;
      case Role::Verification:
        verified[*x.target] = true;
        break;
    }
  }
  return {accepted, has_critique};
}

}  // namespace

ValidityReport validate(const Graph& g) {
  ValidityReport rep;
  const auto& ns = g.nodes();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i].target && *ns[i].target >= ns[i].id) rep.acyclic = false;
  }
  const auto why = violations_by_node(g);
  for (std::size_t i = 0; i < why.size(); ++i) {
    if (!why[i].empty()) rep.violations.push_back({static_cast<std::uint32_t>(i), why[i]});
  }
  rep.accepted = accepted_nodes(g);
  return rep;
}

std::vector<std::uint32_t> accepted_nodes(const Graph& g) {
  const auto st = evaluate(g);
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < st.accepted.size(); ++i)
    if (st.accepted[i]) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

std::vector<Node> summarize(const Graph& g) {
  const auto st = evaluate(g);
  std::vector<Node> out;
  for (std::size_t i = 0; i < st.accepted.size(); ++i) {
    if (st.accepted[i] && !st.has_critique[i]) out.push_back(g.nodes()[i]);
  }
  return out;
}

}  // namespace cdiag::dot
