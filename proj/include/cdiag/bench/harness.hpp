// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "cdiag/agent/backend.hpp"
#include "cdiag/bench/items.hpp"
#include "cdiag/bench/scoring.hpp"
#include "cdiag/kb/knowledge_base.hpp"
#include "json.hpp"

namespace cdiag::bench {

/// Reference answer built from the item payload.
std::string oracle_answer(const BenchmarkItem& item);

/// Answers "ITEM <id>" prompts from the payloads; unknown ids throw
/// BackendError.
class OracleBackend : public agent::Backend {
 public:
  explicit OracleBackend(const std::vector<BenchmarkItem>& items);
  std::string name() const override { return "oracle"; }
  std::string complete(const agent::CompletionRequest& request) override;

 private:
  std::unordered_map<std::string, std::string> answers_;
};

struct HarnessConfig {
  bool rag = false;
  std::size_t rag_k = 3;
  std::string timestamp;    // empty: current UTC time
  std::string report_path;  // empty: not written
};

struct MetricScore {
  std::size_t passed = 0;
  std::size_t total = 0;
  /// passed / total, 0 for an empty metric.
  double score() const;
};

struct ScoreReport {
  std::string backend;
  kb::Visibility visibility = kb::Visibility::FairEval;
  bool rag = false;
  std::string timestamp;
  std::vector<ItemResult> rows;
  std::size_t items_total = 0;
  bool complete = true;
  std::string abort_reason;

  /// Aggregated from rows.
  MetricScore metric(Metric m) const;
};

nlohmann::json to_json(const ScoreReport& r);
ScoreReport report_from_json(const nlohmann::json& j);
std::string render_table(const ScoreReport& r);

/// Items are scored in order. A BackendError stops the run; the report keeps
/// the rows scored so far and is marked incomplete. rag needs `kb`.
ScoreReport run_benchmark(const std::vector<BenchmarkItem>& items, agent::Backend& backend,
                          kb::Visibility visibility, const kb::KnowledgeBase* kb,
                          const HarnessConfig& config = {});

struct Comparison {
  std::vector<std::string> flags;  // "cheating-inconsistent: ..." per Full report
  std::string table;
};

/// Needs at least two reports (MisuseError otherwise).
Comparison compare_reports(const std::vector<ScoreReport>& reports);

/// Audit entries from FairEval retrievals that returned a Retained80 record.
std::vector<std::string> fairness_violations(const kb::KnowledgeBase& kb);

}  // namespace cdiag::bench
