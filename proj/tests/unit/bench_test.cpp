// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cdiag/bench/harness.hpp"
#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::bench {
namespace {

const std::string kData = CDIAG_DATA_DIR;

const std::vector<BenchmarkItem>& mini() {
  static const auto items = load_items(kData + "/bench/mini_benchmark.jsonl");
  return items;
}

const BenchmarkItem& item(const std::string& id) {
  for (const auto& it : mini())
    if (it.id == id) return it;
  throw std::runtime_error("no item " + id);
}

std::vector<std::string> failed_ids(const ScoreReport& r) {
  std::vector<std::string> out;
  for (const auto& row : r.rows)
    if (!row.pass) out.push_back(row.id);
  return out;
}

ChoiceTask abc() { return {{{"A", "x"}, {"B", "y"}, {"C", "z"}}, "B"}; }

TEST(BenchItems, MiniBenchmarkShape) {
  ASSERT_EQ(mini().size(), 30u);
  std::size_t per[3] = {0, 0, 0};
  for (const auto& it : mini()) {
    ++per[static_cast<int>(it.metric)];
    EXPECT_EQ(validate_item(it), "") << it.id;
  }
  EXPECT_EQ(per[0], 10u);
  EXPECT_EQ(per[1], 10u);
  EXPECT_EQ(per[2], 10u);
}

TEST(BenchItems, CanonicalProgramsPassTheirCases) {
  for (const auto& it : mini()) {
    if (it.metric != Metric::B) continue;
    const auto& b = std::get<ProgramTask>(it.expected);
    EXPECT_GE(b.cases.size(), 2u);
    for (const auto& c : b.cases) EXPECT_TRUE(run_case(c, b.canonical).pass) << it.id;
  }
}

TEST(BenchItems, JsonRoundTrip) {
  for (const auto& it : mini()) {
    const auto back = item_from_json(to_json(it));
    EXPECT_EQ(to_json(back), to_json(it)) << it.id;
  }
}

TEST(BenchItems, ValidationRejects) {
  auto j = to_json(item("b-02"));
  while (j["expected"]["cases"].size() > 1) j["expected"]["cases"].erase(1);
  EXPECT_THROW(item_from_json(j), MisuseError);

  j = to_json(item("c-01"));
  j["expected"]["correct"] = "Z";
  EXPECT_THROW(item_from_json(j), MisuseError);
  j = to_json(item("c-01"));
  j["expected"]["choices"] = nlohmann::json::array({{{"label", "A"}, {"text", "only"}}});
  EXPECT_THROW(item_from_json(j), MisuseError);

  j = to_json(item("a-01"));
  j["metric"] = "C";
  EXPECT_THROW(item_from_json(j), MisuseError);

  const std::string line = to_json(item("a-01")).dump();
  try {
    parse_items(line + "\n\n" + line + "\n");
    FAIL();
  } catch (const MisuseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }

  j = to_json(item("b-01"));
  j["expected"]["cases"][1]["output"] = "gpu-4\n";
  try {
    parse_items(j.dump());
    FAIL();
  } catch (const MisuseError& e) {
    EXPECT_NE(std::string(e.what()).find("canonical program fails case 2"), std::string::npos)
        << e.what();
  }
}

TEST(BenchScoringA, FieldRules) {
  const auto& it = item("a-02");
  EXPECT_TRUE(score_response(it, "IP: 10.30.0.12\nPORT: 2222\nCONTINUE: yes").pass);
  EXPECT_TRUE(score_response(it, "  ip:10.30.0.12\nPort: 2222\ncontinue: YES\n").pass);

  auto r = score_response(it, "IP: 10.30.0.12\nPORT: 22\nCONTINUE: yes");
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.diagnostic, "mismatch");
  EXPECT_NE(r.detail.find("wrong port"), std::string::npos);

  r = score_response(it, "IP: 192.168.1.5\nPORT: 2222\nCONTINUE: yes");
  EXPECT_EQ(r.diagnostic, "mismatch");

  for (const char* bad : {"", "10.30.0.12 2222 yes", "IP: 10.30.0.12\nPORT: x\nCONTINUE: yes",
                          "IP: 10.30.0.12\nPORT: 2222\nCONTINUE: maybe",
                          "IP: 10.30.0.12\nIP: 1.2.3.4\nPORT: 2222\nCONTINUE: yes"}) {
    EXPECT_EQ(score_response(it, bad).diagnostic, "format") << bad;
  }
}

// Random well-formed answers pass iff every field equals the expectation.
TEST(BenchScoringA, AllFieldsProperty) {
  std::mt19937_64 rng(11);
  const auto& it = item("a-05");
  const auto& want = std::get<ExtractionAnswer>(it.expected);
  const std::vector<std::string> ips = {want.ip, "10.40.1.1", "10.40.1.21"};
  const std::vector<int> ports = {want.port, 22, 2202};
  for (int n = 0; n < 300; ++n) {
    const auto& ip = ips[rng() % ips.size()];
    const int port = ports[rng() % ports.size()];
    const bool cont = rng() % 2;
    const std::string resp =
        "IP: " + ip + "\nPORT: " + std::to_string(port) + "\nCONTINUE: " + (cont ? "yes" : "no");
    const bool expect = ip == want.ip && port == want.port && cont == want.proceed;
    EXPECT_EQ(score_response(it, resp).pass, expect) << resp;
  }
}

TEST(BenchScoringB, ProgramExtractionAndFailures) {
  const auto& it = item("b-02");
  EXPECT_TRUE(score_response(it, "count ecc_errors > 0 $1").pass);
  EXPECT_TRUE(
      score_response(it, "Here it is:\n```script\ncount ecc_errors > 0 $1\n```\nDone").pass);
  EXPECT_EQ(extract_program("```\nread freq_mhz all\n"), "read freq_mhz all\n");

  EXPECT_EQ(score_response(it, "").diagnostic, "compile");
  EXPECT_EQ(score_response(it, "   \n").diagnostic, "compile");
  EXPECT_EQ(score_response(it, "tally ecc_errors").diagnostic, "compile");
  EXPECT_EQ(score_response(it, "count ecc_errors > 0 $2").diagnostic, "compile");

  auto r = score_response(it, "wait 500\nwait 200\ncount ecc_errors > 0 $1");
  EXPECT_EQ(r.diagnostic, "timeout");
  EXPECT_NE(r.detail.find("case 1"), std::string::npos);

  EXPECT_EQ(score_response(it, "read ecc_errors gpu-99").diagnostic, "runtime");

  r = score_response(it, "count ecc_errors > 1 $1");
  EXPECT_EQ(r.diagnostic, "mismatch");
  EXPECT_EQ(r.detail, "case 2: expected '2\\n', got '1\\n'");
}

// Independent oracle: throttled gpus read straight from device state, not
// through the script interpreter.
TEST(BenchScoringB, SingleGpuMutantFailsOnOtherDevice) {
  const auto& it = item("b-01");
  const auto& task = std::get<ProgramTask>(it.expected);
  const std::string mutant = "find freq_mhz < nominal gpu-3";
  std::size_t mutant_failures = 0;
  for (const auto& c : task.cases) {
    const auto cluster = build_cluster(c.fixture);
    const auto state = cluster->state();
    std::string want;
    for (const auto& g : state.gpus) {
      const auto* spec = cluster->topology().find_gpu(g.id);
      const auto* srv = cluster->topology().server_of_gpu(g.id);
      const bool in_target = c.inputs[0] == "all" || c.inputs[0] == g.id || c.inputs[0] == srv->id;
      if (in_target && g.freq_mhz < spec->nominal_mhz) want += g.id + "\n";
    }
    if (want.empty()) want = "none\n";
    EXPECT_EQ(want, c.output);
    EXPECT_TRUE(run_case(c, task.canonical).pass);
    if (!run_case(c, mutant).pass) ++mutant_failures;
  }
  EXPECT_EQ(mutant_failures, 1u);
  const auto r = score_response(it, mutant);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.detail, "case 2: expected 'gpu-5\\n', got 'none\\n'");
}

TEST(BenchScoringC, FirstLabelRule) {
  const BenchmarkItem it{"c-x", Metric::C, "log", abc()};
  EXPECT_TRUE(score_response(it, "B").pass);
  EXPECT_TRUE(score_response(it, "B, because the clock dropped (see A and C)").pass);
  EXPECT_TRUE(score_response(it, "Answer: (B)").pass);
  auto r = score_response(it, "The answer is C");
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.detail, "chose C");
  EXPECT_EQ(score_response(it, "probably b").diagnostic, "format");
  EXPECT_EQ(score_response(it, "").diagnostic, "format");
  EXPECT_EQ(score_response(it, "BA is not a label").diagnostic, "format");
}

TEST(BenchHarness, OracleScoresOneAndEmptyScoresZero) {
  OracleBackend oracle(mini());
  const auto top = run_benchmark(mini(), oracle, kb::Visibility::Full, nullptr);
  const auto empty = agent::empty_backend();
  const auto bottom = run_benchmark(mini(), *empty, kb::Visibility::Full, nullptr);
  for (Metric m : {Metric::A, Metric::B, Metric::C}) {
    EXPECT_EQ(top.metric(m).score(), 1.0);
    EXPECT_EQ(top.metric(m).total, 10u);
    EXPECT_EQ(bottom.metric(m).score(), 0.0);
  }
  EXPECT_TRUE(top.complete);
  for (const auto& row : bottom.rows) {
    EXPECT_EQ(row.diagnostic, row.metric == Metric::B ? "compile" : "format") << row.id;
  }
}

// Oracle and empty bounds hold for any subset and order of the items.
TEST(BenchHarness, BoundsOnRandomItemSets) {
  std::mt19937_64 rng(5);
  const auto empty = agent::empty_backend();
  for (int n = 0; n < 20; ++n) {
    std::vector<BenchmarkItem> subset;
    for (const auto& it : mini())
      if (rng() % 3 == 0) subset.push_back(it);
    std::shuffle(subset.begin(), subset.end(), rng);
    OracleBackend oracle(subset);
    const auto top = run_benchmark(subset, oracle, kb::Visibility::Full, nullptr);
    const auto bottom = run_benchmark(subset, *empty, kb::Visibility::Full, nullptr);
    for (Metric m : {Metric::A, Metric::B, Metric::C}) {
      EXPECT_EQ(top.metric(m).passed, top.metric(m).total);
      EXPECT_EQ(bottom.metric(m).passed, 0u);
    }
  }
}

// Hand count of the competent fixture: a-04 copies the decoy address; b-01
// reads one gpu, b-05 hard-codes its threshold, b-09 uses the wrong bound and
// b-10 uses an unknown verb; c-03 and c-06 pick wrong labels, c-09 has none.
TEST(BenchHarness, CompetentFixtureScoresExactly) {
  auto backend = agent::load_scripted_backend(kData + "/fixtures/competent_backend.json");
  const auto r = run_benchmark(mini(), *backend, kb::Visibility::FairEval, nullptr);
  EXPECT_EQ(r.metric(Metric::A).score(), 0.9);
  EXPECT_EQ(r.metric(Metric::B).score(), 0.6);
  EXPECT_EQ(r.metric(Metric::C).score(), 0.7);
  EXPECT_EQ(failed_ids(r), (std::vector<std::string>{"a-04", "b-01", "b-05", "b-09", "b-10", "c-03",
                                                     "c-06", "c-09"}));
  std::map<std::string, std::string> diag;
  for (const auto& row : r.rows) diag[row.id] = row.diagnostic;
  EXPECT_EQ(diag["b-10"], "compile");
  EXPECT_EQ(diag["b-09"], "mismatch");
  EXPECT_EQ(diag["c-09"], "format");
  EXPECT_EQ(diag["c-06"], "mismatch");
  EXPECT_EQ(backend->misses(), 0u);
}

TEST(BenchHarness, DeterministicReports) {
  HarnessConfig cfg;
  cfg.timestamp = "2026-01-01T00:00:00Z";
  auto b1 = agent::load_scripted_backend(kData + "/fixtures/competent_backend.json");
  auto b2 = agent::load_scripted_backend(kData + "/fixtures/competent_backend.json");
  const auto r1 = run_benchmark(mini(), *b1, kb::Visibility::FairEval, nullptr, cfg);
  const auto r2 = run_benchmark(mini(), *b2, kb::Visibility::FairEval, nullptr, cfg);
  EXPECT_EQ(to_json(r1), to_json(r2));
  EXPECT_EQ(render_table(r1), render_table(r2));
  EXPECT_EQ(to_json(report_from_json(to_json(r1))), to_json(r1));
}

TEST(BenchHarness, BackendErrorGivesIncompleteReport) {
  std::vector<agent::FixtureEntry> entries;
  for (const char* id : {"a-01", "a-02", "a-03"}) {
    entries.push_back({std::string("ITEM ") + id + "\n", false, oracle_answer(item(id))});
  }
  agent::ScriptedBackend partial("partial", entries, true);
  const std::string path = ::testing::TempDir() + "bench_partial.json";
  HarnessConfig cfg;
  cfg.report_path = path;
  const auto r = run_benchmark(mini(), partial, kb::Visibility::FairEval, nullptr, cfg);
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.items_total, 30u);
  EXPECT_EQ(r.metric(Metric::A).score(), 1.0);
  EXPECT_EQ(r.abort_reason.rfind("item a-04: ", 0), 0u) << r.abort_reason;
  EXPECT_NE(render_table(r).find("INCOMPLETE: 3 of 30"), std::string::npos);
  const auto saved = report_from_json(nlohmann::json::parse(read_file(path)));
  EXPECT_FALSE(saved.complete);
  EXPECT_EQ(saved.rows.size(), 3u);
}

TEST(BenchHarness, FairEvalRetrievalNeverTouchesRetained) {
  auto kb = kb::load_knowledge_base(kData + "/corpus/diagnosis_corpus.jsonl");
  OracleBackend oracle(mini());
  HarnessConfig cfg;
  cfg.rag = true;
  const auto r = run_benchmark(mini(), oracle, kb::Visibility::FairEval, kb.get(), cfg);
  EXPECT_EQ(r.metric(Metric::B).score(), 1.0);
  const auto audit = kb->audit_log();
  ASSERT_EQ(audit.size(), 30u);
  std::size_t returned = 0;
  for (const auto& a : audit) {
    EXPECT_EQ(a.caller.rfind("bench:", 0), 0u);
    EXPECT_EQ(a.visibility, kb::Visibility::FairEval);
    for (auto id : a.returned_ids) EXPECT_EQ(kb->split_of(id), kb::Split::Heldout20);
    returned += a.returned_ids.size();
  }
  EXPECT_GT(returned, 0u);
  EXPECT_TRUE(fairness_violations(*kb).empty());

  // The audit does see retained records when the run uses the full corpus.
  kb->clear_audit_log();
  run_benchmark(mini(), oracle, kb::Visibility::Full, kb.get(), cfg);
  bool saw_retained = false;
  for (const auto& a : kb->audit_log())
    for (auto id : a.returned_ids) saw_retained |= kb->split_of(id) == kb::Split::Retained80;
  EXPECT_TRUE(saw_retained);
}

TEST(BenchHarness, RagPrefixesKnowledge) {
  auto kb = kb::load_knowledge_base(kData + "/corpus/diagnosis_corpus.jsonl");
  std::vector<agent::FixtureEntry> entries = {{"KNOWLEDGE:\n- [", false, "B"},
                                              {"ITEM", false, "A"}};
  agent::ScriptedBackend probe("probe", entries, true);
  HarnessConfig cfg;
  cfg.rag = true;
  const std::vector<BenchmarkItem> one = {item("c-01")};
  const auto r = run_benchmark(one, probe, kb::Visibility::Full, kb.get(), cfg);
  EXPECT_TRUE(r.rows.at(0).pass);
  EXPECT_THROW(run_benchmark(one, probe, kb::Visibility::Full, nullptr, cfg), MisuseError);
}

TEST(BenchHarness, CompareFlagsMixedVisibility) {
  OracleBackend oracle(mini());
  const auto empty = agent::empty_backend();
  const auto fair1 = run_benchmark(mini(), oracle, kb::Visibility::FairEval, nullptr);
  const auto fair2 = run_benchmark(mini(), *empty, kb::Visibility::FairEval, nullptr);
  const auto full = run_benchmark(mini(), oracle, kb::Visibility::Full, nullptr);

  const auto plain = compare_reports({fair1, fair2});
  EXPECT_TRUE(plain.flags.empty());
  EXPECT_EQ(plain.table.find("cheating"), std::string::npos);

  const auto mixed = compare_reports({fair1, full});
  ASSERT_EQ(mixed.flags.size(), 1u);
  EXPECT_EQ(mixed.flags[0].rfind("cheating-inconsistent", 0), 0u);
  EXPECT_NE(mixed.table.find("cheating-inconsistent"), std::string::npos);

  EXPECT_THROW(compare_reports({fair1}), MisuseError);
  EXPECT_THROW(compare_reports({}), MisuseError);
}

}  // namespace
}  // namespace cdiag::bench
