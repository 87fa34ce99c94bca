// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cdiag/agent/backend.hpp"
#include "cdiag/bench/items.hpp"

namespace cdiag::bench {

/// diagnostic is "" on pass, otherwise one of "format", "mismatch",
/// "compile", "timeout", "runtime".
struct ItemResult {
  std::string id;
  Metric metric = Metric::A;
  bool pass = false;
  std::string diagnostic;
  std::string detail;
  std::string response;
  bool operator==(const ItemResult&) const = default;
};

/// Header "METRIC X: ...", an "ITEM <id>" line, instructions, then the item.
std::string item_prompt(const BenchmarkItem& item);

/// Labeled lines IP:, PORT:, CONTINUE: yes|no, keys case-insensitive. Every
/// field must be present exactly once.
std::optional<ExtractionAnswer> parse_extraction(std::string_view response);

/// Body of the first fenced block when there is one, else the whole reply.
std::string extract_program(std::string_view response);

/// First alphanumeric token equal to one of the labels (case-sensitive).
std::optional<std::string> first_label(std::string_view response, const ChoiceTask& task);

struct CaseOutcome {
  bool pass = false;
  std::string diagnostic;
  std::string output;
  std::string error;
};

/// Compiles `program` with the case inputs and runs it on a fresh cluster.
CaseOutcome run_case(const HiddenCase& c, std::string_view program);

/// Grades a response without calling any backend.
ItemResult score_response(const BenchmarkItem& item, std::string_view response);

/// Prompts `backend` (prefixed with `knowledge` when non-empty) and grades the
/// reply. BackendError propagates.
ItemResult score_item(const BenchmarkItem& item, agent::Backend& backend,
                      std::string_view knowledge = "");

}  // namespace cdiag::bench
