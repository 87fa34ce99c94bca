// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/bench/items.hpp"

#include <set>

#include "cdiag/bench/scoring.hpp"
#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/sim/io.hpp"

namespace cdiag::bench {

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw MisuseError(std::string(key) + ": missing field");
  return j.at(key);
}

std::string need_string(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_string()) throw MisuseError(std::string(key) + ": not a string");
  return v.get<std::string>();
}

CaseFixture fixture_from_json(const json& j) {
  CaseFixture f;
  const json& servers = need(j, "servers");
  const json& gpus = need(j, "gpus_per_server");
  if (!servers.is_number_unsigned() || !gpus.is_number_unsigned()) {
    throw MisuseError("fixture: servers and gpus_per_server must be positive integers");
  }
  f.servers = servers.get<std::size_t>();
  f.gpus_per_server = gpus.get<std::size_t>();
  if (f.servers == 0 || f.gpus_per_server == 0) throw MisuseError("fixture: empty topology");
  if (j.contains("faults")) {
    for (const auto& jf : j.at("faults")) f.faults.push_back(sim::fault_from_json(jf));
  }
  if (j.contains("advance_s")) {
    if (!j.at("advance_s").is_number()) throw MisuseError("advance_s: not a number");
    f.advance_s = j.at("advance_s").get<double>();
    if (f.advance_s < 0) throw MisuseError("advance_s: negative");
  }
  return f;
}

json to_json(const CaseFixture& f) {
  json faults = json::array();
  for (const auto& s : f.faults) faults.push_back(sim::to_json(s));
  return {{"servers", f.servers},
          {"gpus_per_server", f.gpus_per_server},
          {"faults", faults},
          {"advance_s", f.advance_s}};
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::A: return "A";
    case Metric::B: return "B";
    case Metric::C: return "C";
  }
  return "?";
}

Metric metric_from_string(std::string_view name) {
  if (name == "A") return Metric::A;
  if (name == "B") return Metric::B;
  if (name == "C") return Metric::C;
  throw MisuseError("unknown metric '" + std::string(name) + "'");
}

std::unique_ptr<sim::Cluster> build_cluster(const CaseFixture& f) {
  sim::ClusterConfig cfg;
  cfg.noise_amplitude = 0;
  auto c = std::make_unique<sim::Cluster>(sim::uniform_topology(f.servers, f.gpus_per_server), cfg);
  for (const auto& spec : f.faults) c->inject_fault(spec);
  if (f.advance_s > 0) c->advance(f.advance_s);
  return c;
}

std::string validate_item(const BenchmarkItem& item) {
  if (item.id.empty()) return "empty id";
  if (item.prompt.empty()) return "empty prompt";
  switch (item.metric) {
    case Metric::A: {
      const auto* a = std::get_if<ExtractionAnswer>(&item.expected);
      if (!a) return "metric A needs an extraction payload";
      if (a->ip.empty()) return "empty ip";
      if (a->port <= 0 || a->port > 65535) return "port out of range";
      return "";
    }
    case Metric::B: {
      const auto* b = std::get_if<ProgramTask>(&item.expected);
      if (!b) return "metric B needs a program payload";
      if (b->cases.size() < 2) return "metric B needs at least two hidden cases";
      if (trim(b->canonical).empty()) return "empty canonical program";
      return "";
    }
    case Metric::C: {
      const auto* c = std::get_if<ChoiceTask>(&item.expected);
      if (!c) return "metric C needs a choice payload";
      if (c->choices.size() < 2 || c->choices.size() > 6) return "metric C needs 2 to 6 choices";
      std::set<std::string> labels;
      for (const auto& ch : c->choices) {
        if (ch.label.empty()) return "empty choice label";
        if (!labels.insert(ch.label).second) return "duplicate choice label " + ch.label;
      }
      if (!labels.count(c->correct)) return "correct label " + c->correct + " is not a choice";
      return "";
    }
  }
  return "unknown metric";
}

BenchmarkItem item_from_json(const json& j) {
  BenchmarkItem item;
  item.id = need_string(j, "id");
  item.metric = metric_from_string(need_string(j, "metric"));
  item.prompt = need_string(j, "prompt");
  const json& e = need(j, "expected");
  switch (item.metric) {
    case Metric::A: {
      ExtractionAnswer a;
      a.ip = need_string(e, "ip");
      if (!need(e, "port").is_number_integer()) throw MisuseError("port: not an integer");
      a.port = e.at("port").get<int>();
      if (!need(e, "continue").is_boolean()) throw MisuseError("continue: not a boolean");
      a.proceed = e.at("continue").get<bool>();
      item.expected = a;
      break;
    }
    case Metric::B: {
      ProgramTask b;
      b.signature = need_string(e, "signature");
      b.canonical = need_string(e, "canonical");
      const json& cases = need(e, "cases");
      if (!cases.is_array()) throw MisuseError("cases: not an array");
      for (const auto& jc : cases) {
        HiddenCase hc;
        hc.fixture = fixture_from_json(need(jc, "fixture"));
        if (jc.contains("inputs")) hc.inputs = jc.at("inputs").get<std::vector<std::string>>();
        hc.output = need_string(jc, "output");
        b.cases.push_back(std::move(hc));
      }
      item.expected = std::move(b);
      break;
    }
    case Metric::C: {
      ChoiceTask c;
      const json& choices = need(e, "choices");
      if (!choices.is_array()) throw MisuseError("choices: not an array");
      for (const auto& jc : choices)
        c.choices.push_back({need_string(jc, "label"), need_string(jc, "text")});
      c.correct = need_string(e, "correct");
      item.expected = std::move(c);
      break;
    }
  }
  if (auto why = validate_item(item); !why.empty()) throw MisuseError(item.id + ": " + why);
  return item;
}

json to_json(const BenchmarkItem& item) {
  json e;
  if (const auto* a = std::get_if<ExtractionAnswer>(&item.expected)) {
    e = {{"ip", a->ip}, {"port", a->port}, {"continue", a->proceed}};
  } else if (const auto* b = std::get_if<ProgramTask>(&item.expected)) {
    json cases = json::array();
    for (const auto& c : b->cases) {
      cases.push_back(
          {{"fixture", to_json(c.fixture)}, {"inputs", c.inputs}, {"output", c.output}});
    }
    e = {{"signature", b->signature}, {"canonical", b->canonical}, {"cases", cases}};
  } else if (const auto* c = std::get_if<ChoiceTask>(&item.expected)) {
    json choices = json::array();
    for (const auto& ch : c->choices) choices.push_back({{"label", ch.label}, {"text", ch.text}});
    e = {{"choices", choices}, {"correct", c->correct}};
  }
  return {{"id", item.id},
          {"metric", std::string(to_string(item.metric))},
          {"prompt", item.prompt},
          {"expected", e}};
}

std::vector<BenchmarkItem> parse_items(std::string_view jsonl) {
  std::vector<BenchmarkItem> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& line : split(jsonl, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    BenchmarkItem item;
    try {
      item = item_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw MisuseError(at + e.what());
    } catch (const MisuseError& e) {
      throw MisuseError(at + e.what());
    }
    if (!ids.insert(item.id).second) throw MisuseError(at + "duplicate item id " + item.id);
    if (const auto* b = std::get_if<ProgramTask>(&item.expected)) {
      for (std::size_t i = 0; i < b->cases.size(); ++i) {
        const auto r = run_case(b->cases[i], b->canonical);
        if (!r.pass) {
          throw MisuseError(at + item.id + ": canonical program fails case " +
                            std::to_string(i + 1) + " (" + r.diagnostic + ": " +
                            (r.error.empty() ? r.output : r.error) + ")");
        }
      }
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<BenchmarkItem> load_items(const std::string& path) {
  return parse_items(read_file(path));
}

}  // namespace cdiag::bench
