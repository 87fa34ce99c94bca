// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Canonical XML form:
//
//   <dot>
//     <node id="0" role="proposition">
//       <text>gpu-3 clock is low</text>
//     </node>
//     <node id="1" role="verification" target="0">
//       <rule>measured 200 MHz &lt; 0.9 * 1410 MHz</rule>
//     </node>
//   </dot>
//
// Segment tags are text, symbol, code, formula and rule. Bodies escape
// & < > " as entities and keep every other byte, newlines included.

#include <cstddef>
#include <string>
#include <string_view>

#include "cdiag/dot/graph.hpp"

namespace cdiag::dot {

std::string escape_xml(std::string_view s);

std::string serialize(const Graph& g);
/// One <node> block without the <dot> wrapper, two-space indented.
std::string serialize_node(const Node& n);

/// Strict parser. Throws ParseError with the line/column of the offending
/// token; grammar violations report the rule name.
Graph parse(std::string_view text);

/// The newest `budget` nodes (budget >= 1) as canonical node blocks, newest
/// first, under a one-line header.
std::string render_prompt(const Graph& g, std::size_t budget);

}  // namespace cdiag::dot
