// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/bench/harness.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::bench {

namespace {

using nlohmann::json;

constexpr Metric kMetrics[] = {Metric::A, Metric::B, Metric::C};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string item_id_in(std::string_view prompt) {
  for (const auto& line : split(prompt, '\n')) {
    const std::string_view l = trim(line);
    if (l.substr(0, 5) == "ITEM ") return std::string(trim(l.substr(5)));
  }
  return "";
}

std::string knowledge_block(const kb::KnowledgeBase& kb, kb::Visibility v,
                            const BenchmarkItem& item, std::size_t k) {
  const auto hits = kb.retrieve(v, item.prompt, k, "bench:" + item.id);
  if (hits.empty()) return "";
  std::string out = "KNOWLEDGE:\n";
  for (const auto& h : hits) {
    const auto rec = kb.record(h.record_id);
    if (!rec) continue;
    out += "- [" + std::to_string(rec->id) + "] " + rec->problemkey + " => " + rec->result;
    if (!rec->function.empty()) out += " (tool " + rec->function + ")";
    out += "\n";
  }
  return out;
}

}  // namespace

std::string oracle_answer(const BenchmarkItem& item) {
  if (const auto* a = std::get_if<ExtractionAnswer>(&item.expected)) {
    return "IP: " + a->ip + "\nPORT: " + std::to_string(a->port) +
           "\nCONTINUE: " + (a->proceed ? "yes" : "no");
  }
  if (const auto* b = std::get_if<ProgramTask>(&item.expected)) return b->canonical;
  return std::get<ChoiceTask>(item.expected).correct;
}

OracleBackend::OracleBackend(const std::vector<BenchmarkItem>& items) {
  for (const auto& it : items) answers_[it.id] = oracle_answer(it);
}

std::string OracleBackend::complete(const agent::CompletionRequest& request) {
  const std::string id = item_id_in(request.last_user());
  const auto it = answers_.find(id);
  if (it == answers_.end()) throw agent::BackendError("oracle: no item '" + id + "'");
  return it->second;
}

double MetricScore::score() const {
  return total == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(total);
}

MetricScore ScoreReport::metric(Metric m) const {
  MetricScore s;
  for (const auto& r : rows) {
    if (r.metric != m) continue;
    ++s.total;
    if (r.pass) ++s.passed;
  }
  return s;
}

json to_json(const ScoreReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"id", row.id},
                    {"metric", std::string(to_string(row.metric))},
                    {"pass", row.pass},
                    {"diagnostic", row.diagnostic},
                    {"detail", row.detail},
                    {"response", row.response}});
  }
  json scores = json::object();
  for (Metric m : kMetrics) {
    const auto s = r.metric(m);
    scores[std::string(to_string(m))] = {
        {"passed", s.passed}, {"total", s.total}, {"score", s.score()}};
  }
  return {{"backend", r.backend},
          {"visibility", std::string(kb::to_string(r.visibility))},
          {"rag", r.rag},
          {"timestamp", r.timestamp},
          {"items_total", r.items_total},
          {"complete", r.complete},
          {"abort_reason", r.abort_reason},
          {"scores", scores},
          {"rows", rows}};
}

ScoreReport report_from_json(const json& j) {
  try {
    ScoreReport r;
    r.backend = j.at("backend").get<std::string>();
    r.visibility = kb::visibility_from_string(j.at("visibility").get<std::string>());
    r.rag = j.at("rag").get<bool>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.items_total = j.at("items_total").get<std::size_t>();
    r.complete = j.at("complete").get<bool>();
    r.abort_reason = j.value("abort_reason", "");
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("id").get<std::string>(),
                        metric_from_string(row.at("metric").get<std::string>()),
                        row.at("pass").get<bool>(), row.value("diagnostic", ""),
                        row.value("detail", ""), row.value("response", "")});
    }
    return r;
  } catch (const json::exception& e) {
    throw MisuseError(std::string("malformed report: ") + e.what());
  }
}

std::string render_table(const ScoreReport& r) {
  std::string out = "backend " + r.backend + " | visibility " +
                    std::string(kb::to_string(r.visibility)) + " | rag " + (r.rag ? "on" : "off") +
                    " | " + r.timestamp + "\n";
  out += "metric  passed  total  score\n";
  for (Metric m : kMetrics) {
    const auto s = r.metric(m);
    out += pad(std::string(to_string(m)), 8) + pad(std::to_string(s.passed), 8) +
           pad(std::to_string(s.total), 7) + fixed3(s.score()) + "\n";
  }
  if (!r.complete) {
    out += "INCOMPLETE: " + std::to_string(r.rows.size()) + " of " + std::to_string(r.items_total) +
           " items scored (" + r.abort_reason + ")\n";
  }
  return out;
}

ScoreReport run_benchmark(const std::vector<BenchmarkItem>& items, agent::Backend& backend,
                          kb::Visibility visibility, const kb::KnowledgeBase* kb,
                          const HarnessConfig& config) {
  if (config.rag && !kb) throw MisuseError("rag needs a knowledge base");
  ScoreReport report;
  report.backend = backend.name();
  report.visibility = visibility;
  report.rag = config.rag;
  report.timestamp = config.timestamp.empty() ? utc_now() : config.timestamp;
  report.items_total = items.size();
  for (const auto& item : items) {
    const std::string knowledge =
        config.rag ? knowledge_block(*kb, visibility, item, config.rag_k) : std::string();
    try {
      report.rows.push_back(score_item(item, backend, knowledge));
    } catch (const agent::BackendError& e) {
      report.complete = false;
      report.abort_reason = "item " + item.id + ": " + e.what();
      break;
    }
  }
  if (!config.report_path.empty()) write_file(config.report_path, to_json(report).dump(2) + "\n");
  return report;
}

Comparison compare_reports(const std::vector<ScoreReport>& reports) {
  if (reports.size() < 2) throw MisuseError("compare_reports needs at least two reports");
  bool fair = false, full = false;
  for (const auto& r : reports) (r.visibility == kb::Visibility::Full ? full : fair) = true;
  const bool mixed = fair && full;

  Comparison c;
  c.table = pad("backend", 16) + pad("visibility", 12) + pad("rag", 5) + pad("A", 7) + pad("B", 7) +
            pad("C", 7) + "flag\n";
  for (const auto& r : reports) {
    std::string flag;
    if (mixed && r.visibility == kb::Visibility::Full) {
      flag = "cheating-inconsistent";
      c.flags.push_back(flag + ": " + r.backend + " used full visibility");
    }
    if (!r.complete) flag += flag.empty() ? "incomplete" : ", incomplete";
    c.table += pad(r.backend, 16) + pad(std::string(kb::to_string(r.visibility)), 12) +
               pad(r.rag ? "on" : "off", 5);
    for (Metric m : kMetrics) c.table += pad(fixed3(r.metric(m).score()), 7);
    c.table += flag + "\n";
  }
  return c;
}

std::vector<std::string> fairness_violations(const kb::KnowledgeBase& kb) {
  std::vector<std::string> out;
  for (const auto& a : kb.audit_log()) {
    if (a.visibility != kb::Visibility::FairEval) continue;
    for (auto id : a.returned_ids) {
      if (kb.split_of(id) == kb::Split::Retained80) {
        out.push_back(a.caller + " retrieved retained record " + std::to_string(id));
      }
    }
  }
  return out;
}

}  // namespace cdiag::bench
