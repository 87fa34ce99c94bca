// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Benchmark items. A: field extraction, B: diagnostic program graded by hidden
// cases on a simulated cluster, C: multiple-choice attribution.

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cdiag/sim/cluster.hpp"
#include "json.hpp"

namespace cdiag::bench {

enum class Metric { A, B, C };

std::string_view to_string(Metric m);
/// "A", "B" or "C"; MisuseError otherwise.
Metric metric_from_string(std::string_view name);

struct ExtractionAnswer {
  std::string ip;
  int port = 0;
  bool proceed = false;
  bool operator==(const ExtractionAnswer&) const = default;
};

/// Uniform topology plus faults, then `advance_s` of simulated time.
struct CaseFixture {
  std::size_t servers = 1;
  std::size_t gpus_per_server = 1;
  std::vector<sim::FaultSpec> faults;
  double advance_s = 0;
};

/// Noise-free cluster built from the fixture.
std::unique_ptr<sim::Cluster> build_cluster(const CaseFixture& f);

struct HiddenCase {
  CaseFixture fixture;
  std::vector<std::string> inputs;  // bound to $1..$9
  std::string output;
};

struct ProgramTask {
  std::string signature;
  std::string canonical;
  std::vector<HiddenCase> cases;
};

struct Choice {
  std::string label;
  std::string text;
};

struct ChoiceTask {
  std::vector<Choice> choices;
  std::string correct;
};

struct BenchmarkItem {
  std::string id;
  Metric metric = Metric::A;
  std::string prompt;
  std::variant<ExtractionAnswer, ProgramTask, ChoiceTask> expected;
};

/// Structural problems ("" when none): payload kind vs metric, B with fewer
/// than two cases, C with 2..6 unique labels and exactly one correct.
std::string validate_item(const BenchmarkItem& item);

BenchmarkItem item_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkItem& item);

/// One item per line; blank lines skipped. Throws MisuseError naming the line
/// for malformed items, duplicate ids, or a B item whose canonical program
/// fails its own cases.
std::vector<BenchmarkItem> parse_items(std::string_view jsonl);
std::vector<BenchmarkItem> load_items(const std::string& path);

}  // namespace cdiag::bench
