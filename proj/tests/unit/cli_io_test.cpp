// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cdiag/bench/harness.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/gateway/http.hpp"
#include "cli.hpp"

namespace cdiag::cli {
namespace {

const std::string kData = CDIAG_DATA_DIR;
const std::string kItems = kData + "/bench/mini_benchmark.jsonl";
const std::string kCorpus = kData + "/corpus/diagnosis_corpus.jsonl";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp(const std::string& name) {
  return (std::filesystem::path(::testing::TempDir()) / name).string();
}

TEST(CliBench, TableForEachBackend) {
  auto r = cli({"bench", "run", "--items", kItems, "--backend", "oracle", "--visibility",
                "faireval", "--rag", "off"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("backend oracle | visibility faireval | rag off"), std::string::npos);
  EXPECT_NE(r.out.find("A       10      10     1.000"), std::string::npos) << r.out;

  r = cli({"bench", "run", "--items", kItems, "--backend", "empty"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("B       0       10     0.000"), std::string::npos) << r.out;

  r = cli({"bench", "run", "--items", kItems, "--backend",
           kData + "/fixtures/competent_backend.json", "--visibility", "full", "--rag", "on",
           "--corpus", kCorpus, "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["scores"]["A"]["score"], 0.9);
  EXPECT_EQ(j["scores"]["B"]["score"], 0.6);
  EXPECT_EQ(j["scores"]["C"]["score"], 0.7);
  EXPECT_EQ(j["visibility"], "full");
  EXPECT_EQ(j["rag"], true);
}

TEST(CliBench, FairEvalRunWithRetrievalHasNoLeaks) {
  const auto r = cli({"bench", "run", "--items", kItems, "--backend", "oracle", "--visibility",
                      "faireval", "--rag", "on", "--corpus", kCorpus});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.err, "");
}

TEST(CliBench, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"bench"}).code, 2);
  EXPECT_EQ(cli({"bench", "run"}).code, 2);
  auto r = cli({"bench", "run", "--items", kItems, "--visibility", "partial"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown visibility"), std::string::npos) << r.err;
  r = cli({"bench", "run", "--items", kItems, "--rag", "maybe"});
  EXPECT_EQ(r.code, 2);
  r = cli({"bench", "run", "--items", kItems, "--rag", "on"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--corpus"), std::string::npos);
  r = cli({"bench", "run", "--items", kItems, "--backend", "gpt-imaginary"});
  EXPECT_EQ(r.code, 2);
  r = cli({"bench", "run", "--items", kItems + ".missing"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cannot read"), std::string::npos);
  r = cli({"bench", "run", "--items", kItems, "--format", "xml"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(CliBench, SavedReportsCompare) {
  const auto fair = temp("cli_fair.json"), full = temp("cli_full.json"), empty = temp("cli_e.json");
  ASSERT_EQ(cli({"bench", "run", "--items", kItems, "--out", fair}).code, 0);
  ASSERT_EQ(cli({"bench", "run", "--items", kItems, "--backend", "empty", "--out", empty}).code, 0);
  ASSERT_EQ(cli({"bench", "run", "--items", kItems, "--visibility", "full", "--out", full}).code,
            0);

  auto r = cli({"bench", "compare", fair, empty});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.find("cheating"), std::string::npos);
  EXPECT_NE(r.out.find("oracle"), std::string::npos);

  r = cli({"bench", "compare", fair, full});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("cheating-inconsistent: oracle used full visibility"), std::string::npos)
      << r.out;

  r = cli({"bench", "compare", fair});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("at least two"), std::string::npos);
  write_file(temp("cli_bad.json"), "{\"backend\": 3}");
  EXPECT_EQ(cli({"bench", "compare", fair, temp("cli_bad.json")}).code, 2);
}

TEST(CliBench, IncompleteRunExitsOne) {
  const auto fixture = temp("cli_partial_fixture.json");
  write_file(fixture, R"({"name":"partial","strict":true,"entries":[
    {"match":"ITEM a-01\n","response":"IP: 10.30.0.11\nPORT: 22\nCONTINUE: yes"}]})");
  const auto r = cli({"bench", "run", "--items", kItems, "--backend", fixture});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("INCOMPLETE: 1 of 30 items scored"), std::string::npos) << r.out;
}

TEST(CliDrill, ApprovedDrillReportsVerdict) {
  const auto dir = temp("cli_drill_sessions");
  std::filesystem::remove_all(dir);
  const auto r = cli({"drill", "--data", kData, "--approver", "ops", "--session-dir", dir});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("ratio 0.33"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("power_anomaly gpu-3"), std::string::npos);
  EXPECT_NE(r.out.find("slowdown_verdict gpu-3"), std::string::npos);
  EXPECT_NE(r.out.find("approval r-1 requested:\n  set_frequency 1410 gpu-3\n  read freq_mhz"),
            std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("completed after 3 rounds, 1 test cases"), std::string::npos);
  EXPECT_NE(r.out.find("verdict: gpu-3 (gpu core frequency throttled)"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "s-1" / "verdict.json"));
}

TEST(CliDrill, MissingDataDirectory) {
  const auto r = cli({"drill", "--data", "/nonexistent"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error: "), std::string::npos);
}

TEST(CliKb, QueryRanksExactProblemFirst) {
  auto r = cli({"kb", "query", "gpu frequency throttle", "--corpus", kCorpus, "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = split(trim(r.out), '\n');
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].rfind("1. [", 0), 0u);
  EXPECT_NE(lines[0].find("gpu frequency throttle =>"), std::string::npos);
  r = cli({"kb", "query", "zzzz qqqq", "--corpus", kCorpus});
  EXPECT_EQ(r.out, "no hits\n");
}

TEST(CliServe, StartupErrors) {
  auto r = cli({"serve", "--config", "/nonexistent.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cannot read"), std::string::npos) << r.err;

  const auto bad = temp("cli_bad_service.json");
  write_file(bad, R"({"listen": {"port": 99999}})");
  r = cli({"serve", "--config", bad});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("port out of range"), std::string::npos) << r.err;

  // A port held by another server.
  auto cfg = gateway::load_service_config(kData + "/config/service.json",
                                          [](const std::string&) { return std::nullopt; });
  cfg.session_dir = temp("cli_serve_sessions");
  gateway::Service svc(cfg);
  gateway::HttpServer holder(svc);
  const int port = holder.bind("127.0.0.1", 0);
  holder.start();
  r = cli({"serve", "--config", kData + "/config/service.json", "--port", std::to_string(port)});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cannot bind"), std::string::npos) << r.err;
  holder.stop();
}

}  // namespace
}  // namespace cdiag::cli
