// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/bench/scoring.hpp"

#include <cctype>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/sim/script.hpp"

namespace cdiag::bench {

namespace {

std::string escaped(std::string_view s) {
  std::string out = "'";
  for (char c : s) out += c == '\n' ? std::string("\\n") : std::string(1, c);
  return out + "'";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

ItemResult grade_a(const ExtractionAnswer& want, std::string_view response) {
  ItemResult r;
  const auto got = parse_extraction(response);
  if (!got) {
    r.diagnostic = "format";
    r.detail = "expected IP:, PORT: and CONTINUE: lines";
    return r;
  }
  r.detail = "ip " + got->ip + ", port " + std::to_string(got->port) + ", continue " +
             yes_no(got->proceed);
  std::vector<std::string> wrong;
  if (got->ip != want.ip) wrong.push_back("ip");
  if (got->port != want.port) wrong.push_back("port");
  if (got->proceed != want.proceed) wrong.push_back("continue");
  if (wrong.empty()) {
    r.pass = true;
  } else {
    r.diagnostic = "mismatch";
    r.detail += " (wrong " + join(wrong, ", ") + ")";
  }
  return r;
}

ItemResult grade_b(const ProgramTask& task, std::string_view response) {
  ItemResult r;
  const std::string program = extract_program(response);
  for (std::size_t i = 0; i < task.cases.size(); ++i) {
    const auto c = run_case(task.cases[i], program);
    if (!c.pass) {
      r.diagnostic = c.diagnostic;
      r.detail = "case " + std::to_string(i + 1) + ": ";
      if (c.diagnostic == "mismatch") {
        r.detail += "expected " + escaped(task.cases[i].output) + ", got " + escaped(c.output);
      } else {
        r.detail += c.error;
      }
      return r;
    }
  }
  r.pass = true;
  r.detail = std::to_string(task.cases.size()) + " cases passed";
  return r;
}

ItemResult grade_c(const ChoiceTask& task, std::string_view response) {
  ItemResult r;
  const auto label = first_label(response, task);
  if (!label) {
    r.diagnostic = "format";
    r.detail = "no choice label in response";
    return r;
  }
  r.detail = "chose " + *label;
  r.pass = *label == task.correct;
  if (!r.pass) r.diagnostic = "mismatch";
  return r;
}

}  // namespace

std::string item_prompt(const BenchmarkItem& item) {
  std::string p;
  switch (item.metric) {
    case Metric::A:
      p = "METRIC A: FIELD EXTRACTION\nITEM " + item.id + "\n";
      p += "Extract the cluster IP address, its SSH port and whether the user wants the "
           "investigation to continue. Ignore commands and addresses unrelated to the cluster.\n"
           "Answer with the lines:\nIP: <address>\nPORT: <number>\nCONTINUE: yes|no\n";
      p += "CONVERSATION:\n" + item.prompt + "\n";
      break;
    case Metric::B: {
      const auto& b = std::get<ProgramTask>(item.expected);
      p = "METRIC B: DIAGNOSTIC PROGRAM\nITEM " + item.id + "\n";
      p += "Write a cluster script. Verbs: read, find, count, echo, wait, set_frequency, "
           "clear_fault, restart_job. Inputs are bound to $1..$9. Reply with the program, "
           "optionally inside a fenced block.\n";
      p += "SIGNATURE: " + b.signature + "\nTASK: " + item.prompt + "\n";
      break;
    }
    case Metric::C: {
      const auto& c = std::get<ChoiceTask>(item.expected);
      p = "METRIC C: ATTRIBUTION\nITEM " + item.id + "\n";
      p += "Pick the most likely root cause. Answer with its label.\nLOG:\n" + item.prompt +
           "\nCHOICES:\n";
      for (const auto& ch : c.choices) p += ch.label + ". " + ch.text + "\n";
      break;
    }
  }
  return p;
}

std::optional<ExtractionAnswer> parse_extraction(std::string_view response) {
  std::optional<std::string> ip, port, cont;
  for (const auto& raw : split(response, '\n')) {
    const std::string_view line = trim(raw);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string key = to_lower(trim(line.substr(0, colon)));
    const std::string value(trim(line.substr(colon + 1)));
    std::optional<std::string>* slot = key == "ip"         ? &ip
                                       : key == "port"     ? &port
                                       : key == "continue" ? &cont
                                                           : nullptr;
    if (!slot) continue;
    if (slot->has_value()) return std::nullopt;
    *slot = value;
  }
  if (!ip || !port || !cont || ip->empty()) return std::nullopt;
  const auto p = parse_int(*port);
  if (!p || *p <= 0 || *p > 65535) return std::nullopt;
  const std::string c = to_lower(*cont);
  if (c != "yes" && c != "no") return std::nullopt;
  return ExtractionAnswer{*ip, static_cast<int>(*p), c == "yes"};
}

std::string extract_program(std::string_view response) {
  const auto open = response.find("```");
  if (open != std::string_view::npos) {
    auto body_start = response.find('\n', open);
    if (body_start != std::string_view::npos) {
      ++body_start;
      const auto close = response.find("```", body_start);
      return std::string(response.substr(body_start, close == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : close - body_start));
    }
  }
  return std::string(trim(response));
}

std::optional<std::string> first_label(std::string_view response, const ChoiceTask& task) {
  std::size_t i = 0;
  while (i < response.size()) {
    while (i < response.size() && !std::isalnum(static_cast<unsigned char>(response[i]))) ++i;
    const std::size_t start = i;
    while (i < response.size() && std::isalnum(static_cast<unsigned char>(response[i]))) ++i;
    if (i == start) break;
    const std::string_view tok = response.substr(start, i - start);
    for (const auto& ch : task.choices) {
      if (ch.label == tok) return ch.label;
    }
  }
  return std::nullopt;
}

CaseOutcome run_case(const HiddenCase& c, std::string_view program) {
  CaseOutcome out;
  if (trim(program).empty()) {
    out.diagnostic = "compile";
    out.error = "empty program";
    return out;
  }
  sim::ScriptProgram prog;
  try {
    prog = sim::compile_script(program, c.inputs);
  } catch (const ParseError& e) {
    out.diagnostic = "compile";
    out.error = "line " + std::to_string(e.line()) + ", column " + std::to_string(e.column()) +
                ": " + e.message();
    return out;
  }
  const auto cluster = build_cluster(c.fixture);
  const auto run = sim::run_script(*cluster, prog);
  out.output = run.output;
  out.error = run.error;
  switch (run.status) {
    case sim::ScriptStatus::Timeout: out.diagnostic = "timeout"; return out;
    case sim::ScriptStatus::RuntimeError: out.diagnostic = "runtime"; return out;
    case sim::ScriptStatus::Ok: break;
  }
  out.pass = run.output == c.output;
  if (!out.pass) out.diagnostic = "mismatch";
  return out;
}

ItemResult score_response(const BenchmarkItem& item, std::string_view response) {
  ItemResult r;
  switch (item.metric) {
    case Metric::A: r = grade_a(std::get<ExtractionAnswer>(item.expected), response); break;
    case Metric::B: r = grade_b(std::get<ProgramTask>(item.expected), response); break;
    case Metric::C: r = grade_c(std::get<ChoiceTask>(item.expected), response); break;
  }
  r.id = item.id;
  r.metric = item.metric;
  r.response = std::string(response);
  return r;
}

ItemResult score_item(const BenchmarkItem& item, agent::Backend& backend,
                      std::string_view knowledge) {
  agent::CompletionRequest req;
  req.system = "You are a cluster operations assistant. Follow the answer format exactly.";
  std::string prompt;
  if (!knowledge.empty()) prompt = std::string(knowledge) + "\n";
  prompt += item_prompt(item);
  req.turns.push_back({"user", prompt});
  return score_response(item, backend.complete(req));
}

}  // namespace cdiag::bench
