// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Diagram-of-Thought graph: propositions, critiques, refinements and
// verifications. Every edge points from a node to an earlier one, so the graph
// is acyclic by construction.
//
// Acceptance:
//   accepted(X)  iff X is a proposition or refinement, some verification
//                targets X, and every critique targeting X is answered
//   answered(C)  iff some refinement R targeting C is resolved
//   resolved(R)  iff accepted(R), or some critique targeting R is answered
//                (R was itself superseded by a later accepted refinement)

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdiag/common/error.hpp"

namespace cdiag::dot {

enum class Role { Proposition, Critique, Refinement, Verification };
enum class SegmentKind { PlainText, Symbol, Code, Formula, Rule };

std::string_view to_string(Role r);
std::string_view tag_name(SegmentKind k);  // text, symbol, code, formula, rule
std::optional<Role> role_from_string(std::string_view s);
std::optional<SegmentKind> segment_kind_from_tag(std::string_view s);

struct Segment {
  SegmentKind kind = SegmentKind::PlainText;
  std::string body;
  bool operator==(const Segment&) const = default;
};

struct Node {
  std::uint32_t id = 0;
  Role role = Role::Proposition;
  std::vector<Segment> content;
  std::optional<std::uint32_t> target;
  bool operator==(const Node&) const = default;
};

struct Edge {
  std::uint32_t from;
  std::uint32_t to;
  std::string_view label;  // critiques, refines, verifies
};

/// Raised by add_node; rule() names the violated grammar rule.
class GrammarError : public MisuseError {
 public:
  explicit GrammarError(const std::string& rule) : MisuseError(rule), rule_(rule) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

class Graph {
 public:
  /// Returns the new node id (its creation index). Throws GrammarError.
  std::uint32_t add_node(Role role, std::vector<Segment> content,
                         std::optional<std::uint32_t> target = std::nullopt);

  std::uint32_t propose(std::string text);
  std::uint32_t critique(std::uint32_t target, std::string text);
  std::uint32_t refine(std::uint32_t target, std::string text);
  std::uint32_t verify(std::uint32_t target, std::string text);

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const Node& node(std::uint32_t id) const;
  std::vector<Edge> edges() const;

  /// Builds a graph without grammar checks, for validating foreign input.
  static Graph unchecked(std::vector<Node> nodes);

  bool operator==(const Graph&) const = default;

 private:
  std::vector<Node> nodes_;
};

/// Empty when `role`/`target` are admissible as the next node of `g`,
/// otherwise the violated rule.
std::string grammar_violation(const Graph& g, Role role, const std::vector<Segment>& content,
                              std::optional<std::uint32_t> target, std::uint32_t as_id);

struct NodeViolation {
  std::uint32_t node;
  std::string rule;
};

struct ValidityReport {
  bool acyclic = true;
  std::vector<NodeViolation> violations;
  std::vector<std::uint32_t> accepted;  // ascending
  bool valid() const { return acyclic && violations.empty(); }
};

ValidityReport validate(const Graph& g);

/// Accepted node ids, ascending. Nodes that break the grammar are ignored.
std::vector<std::uint32_t> accepted_nodes(const Graph& g);

/// Accepted nodes with no critique against them, in creation order. A node
/// whose critiques were answered is superseded by the answering refinement.
std::vector<Node> summarize(const Graph& g);

}  // namespace cdiag::dot
