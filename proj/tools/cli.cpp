// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <pthread.h>

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>

#include "CLI11.hpp"
#include "cdiag/agent/drill.hpp"
#include "cdiag/agent/orchestrator.hpp"
#include "cdiag/bench/harness.hpp"
#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/gateway/http.hpp"
#include "cdiag/perf/model.hpp"
#include "cdiag/sim/io.hpp"

namespace cdiag::cli {

namespace {

using nlohmann::json;

struct ServeArgs {
  std::string config;
  int port = -1;
};

struct BenchArgs {
  std::string items;
  std::string backend = "oracle";
  std::string visibility = "faireval";
  std::string rag = "off";
  std::string corpus;
  std::size_t rag_k = 3;
  std::string out;
  std::string format = "table";
};

struct DrillArgs {
  std::string data = "data";
  std::string session_dir;
  std::string approver;
};

struct QueryArgs {
  std::string corpus;
  std::string text;
  std::size_t k = 5;
  std::string visibility = "full";
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  auto cfg = gateway::load_service_config(a.config);
  if (a.port >= 0) cfg.port = a.port;
  gateway::validate(cfg);

  // Block the shutdown signals before any thread starts so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &set, &previous);
  struct Restore {
    sigset_t mask;
    ~Restore() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  gateway::Service svc(cfg);
  gateway::HttpServer http(svc);
  const int port = http.bind(cfg.host, cfg.port);
  http.start();
  svc.start();
  out << "listening on " << cfg.host << ":" << port << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  out << "shutting down" << std::endl;
  svc.stop();
  http.stop();
  return 0;
}

int cmd_bench_run(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.rag != "on" && a.rag != "off") throw MisuseError("--rag must be on or off");
  const auto items = bench::load_items(a.items);
  const auto visibility = kb::visibility_from_string(a.visibility);
  std::shared_ptr<kb::KnowledgeBase> kb;
  if (!a.corpus.empty()) kb = kb::load_knowledge_base(a.corpus);
  if (a.rag == "on" && !kb) throw MisuseError("--rag on needs --corpus");
  auto backend = gateway::make_bench_backend(a.backend, items);

  bench::HarnessConfig hc;
  hc.rag = a.rag == "on";
  hc.rag_k = a.rag_k;
  hc.report_path = a.out;
  const auto report = bench::run_benchmark(items, *backend, visibility, kb.get(), hc);
  if (a.format == "json") {
    out << bench::to_json(report).dump(2) << "\n";
  } else {
    out << bench::render_table(report);
  }
  if (kb && visibility == kb::Visibility::FairEval) {
    const auto leaks = bench::fairness_violations(*kb);
    for (const auto& l : leaks) err << "fairness violation: " << l << "\n";
    if (!leaks.empty()) return 1;
  }
  return report.complete ? 0 : 1;
}

int cmd_bench_compare(const std::vector<std::string>& paths, std::ostream& out) {
  std::vector<bench::ScoreReport> reports;
  for (const auto& p : paths) {
    try {
      reports.push_back(bench::report_from_json(json::parse(read_file(p))));
    } catch (const json::exception& e) {
      throw MisuseError(p + ": " + e.what());
    }
  }
  const auto cmp = bench::compare_reports(reports);
  out << cmp.table;
  for (const auto& f : cmp.flags) out << f << "\n";
  return 0;
}

int cmd_drill(const DrillArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path data(a.data);
  sim::Cluster cluster(sim::load_topology((data / "topology/drill.json").string()));
  auto kb = kb::load_knowledge_base((data / "corpus/diagnosis_corpus.jsonl").string());
  auto backend = agent::load_scripted_backend((data / "fixtures/drill_backend.json").string());
  agent::ApprovalRegistry approvals;
  agent::Monitor monitor(cluster);
  std::unique_ptr<agent::SessionStore> store;
  if (!a.session_dir.empty()) store = std::make_unique<agent::SessionStore>(a.session_dir);
  if (!a.approver.empty()) {
    approvals.add_listener([&](const agent::ApprovalRequest& r) {
      if (r.status != agent::ApprovalStatus::Pending) return;
      std::string script = r.script;
      for (std::size_t i = 0; (i = script.find('\n', i)) != std::string::npos; i += 3) {
        script.replace(i, 1, "\n  ");
      }
      out << "approval " << r.id << " requested:\n  " << script << "\n  intent: " << r.intent
          << "\n  approved by " << a.approver << "\n";
      approvals.decide(r.id, true, a.approver, cluster.now());
    });
  }

  const auto mean_rate = [](const sim::JobRun& run) {
    std::vector<double> rates;
    for (const auto& it : run.iterations) rates.push_back(it.rate);
    return perf::estimate_rate(rates, 1, 0.05, 3).mean;
  };
  const double healthy = mean_rate(cluster.run_job(agent::drill_job(cluster)));
  monitor.poll();
  cluster.inject_fault(agent::drill_fault(cluster));
  const double throttled = mean_rate(cluster.run_job(agent::drill_job(cluster)));
  out << "job rate: healthy " << fixed(healthy, 4) << " iter/s, throttled " << fixed(throttled, 4)
      << " iter/s, ratio " << fixed(throttled / healthy, 4) << "\n";

  const auto alerts = monitor.poll();
  for (const auto& al : alerts) {
    out << "alert " << al.id << " " << agent::to_string(al.source) << " " << al.device << ": "
        << al.evidence << "\n";
  }
  if (alerts.empty()) {
    out << "no alerts raised\n";
    return 1;
  }
  agent::SessionConfig sc;
  sc.approval_timeout_s = 60;  // without --approver the remediation request times out
  agent::Orchestrator orch(cluster, *backend, *kb, approvals, sc, store.get());
  const auto s = orch.run_session(alerts.front());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "session " << s.id << " " << agent::to_string(s.status) << " after " << s.rounds.size()
      << " rounds, " << s.test_cases << " test cases\n";
  if (!s.verdict) {
    out << "no verdict: " << s.failure << "\n";
    return 1;
  }
  out << "verdict: " << join(s.verdict->devices, ",") << " (" << s.verdict->cause << ")\n";
  out << "remediation: " << s.verdict->remediation << "\n";
  if (s.appended_record) out << "knowledge record " << *s.appended_record << " appended\n";
  out << "wall " << fixed(wall, 3) << " s\n";
  return 0;
}

int cmd_kb_query(const QueryArgs& a, std::ostream& out) {
  auto kb = kb::load_knowledge_base(a.corpus);
  const auto hits = kb->retrieve(kb::visibility_from_string(a.visibility), a.text, a.k, "cli");
  if (hits.empty()) out << "no hits\n";
  std::size_t rank = 0;
  for (const auto& h : hits) {
    const auto rec = kb->record(h.record_id);
    out << ++rank << ". [" << h.record_id << "] " << fixed(h.score, 4) << " " << rec->problemkey
        << " => " << rec->result << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"clusterdiag: cluster diagnosis agent, simulator and benchmark harness", "cdiag"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP gateway");
  serve_cmd->add_option("--config", serve.config, "Service config JSON")->required();
  serve_cmd->add_option("--port", serve.port, "Override the listen port (0 picks a free one)");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark harness");
  bench_cmd->require_subcommand(1);
  BenchArgs bench_args;
  auto* run_cmd = bench_cmd->add_subcommand("run", "Score a backend on benchmark items");
  run_cmd->add_option("--items", bench_args.items, "Item file (JSONL)")->required();
  run_cmd->add_option("--backend", bench_args.backend, "oracle, empty, or a fixture path");
  run_cmd->add_option("--visibility", bench_args.visibility, "faireval or full");
  run_cmd->add_option("--rag", bench_args.rag, "on or off");
  run_cmd->add_option("--corpus", bench_args.corpus, "Knowledge corpus for retrieval");
  run_cmd->add_option("--rag-k", bench_args.rag_k, "Records retrieved per item");
  run_cmd->add_option("--out", bench_args.out, "Write the report JSON here");
  run_cmd->add_option("--format", bench_args.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  std::vector<std::string> compare_paths;
  auto* cmp_cmd = bench_cmd->add_subcommand("compare", "Compare saved reports");
  cmp_cmd->add_option("reports", compare_paths, "Report JSON files")->required();

  DrillArgs drill;
  auto* drill_cmd = app.add_subcommand("drill", "Run the gpu-throttle drill in process");
  drill_cmd->add_option("--data", drill.data, "Data directory");
  drill_cmd->add_option("--session-dir", drill.session_dir, "Persist the session here");
  drill_cmd->add_option("--approver", drill.approver, "Approve remediation requests as NAME");

  auto* kb_cmd = app.add_subcommand("kb", "Knowledge base");
  kb_cmd->require_subcommand(1);
  QueryArgs query;
  auto* query_cmd = kb_cmd->add_subcommand("query", "Retrieve records for a query");
  query_cmd->add_option("text", query.text, "Query text")->required();
  query_cmd->add_option("--corpus", query.corpus, "Corpus JSONL")->required();
  query_cmd->add_option("--k", query.k, "Hits to return");
  query_cmd->add_option("--visibility", query.visibility, "faireval or full");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*serve_cmd) return cmd_serve(serve, out);
    if (*run_cmd) return cmd_bench_run(bench_args, out, err);
    if (*cmp_cmd) return cmd_bench_compare(compare_paths, out);
    if (*drill_cmd) return cmd_drill(drill, out);
    if (*query_cmd) return cmd_kb_query(query, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace cdiag::cli
