// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/sim/script.hpp"

#include <algorithm>
#include <cctype>

#include "cdiag/common/text.hpp"

namespace cdiag::sim {

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

struct VerbName {
  Verb verb;
  std::string_view name;
};

constexpr VerbName kVerbs[] = {
    {Verb::Read, "read"},           {Verb::Find, "find"},
    {Verb::Count, "count"},         {Verb::Echo, "echo"},
    {Verb::Wait, "wait"},           {Verb::SetFrequency, "set_frequency"},
    {Verb::ClearFault, "clear_fault"}, {Verb::RestartJob, "restart_job"},
};

constexpr std::string_view kOps[] = {"<", "<=", ">", ">=", "==", "!="};

bool is_metric(std::string_view m) { return is_gpu_metric(m) || is_server_metric(m); }

std::string substitute(const Token& tok, std::size_t line, std::span<const std::string> inputs) {
  std::string out;
  for (std::size_t i = 0; i < tok.text.size(); ++i) {
    const char c = tok.text[i];
    if (c == '$' && i + 1 < tok.text.size() && tok.text[i + 1] >= '1' && tok.text[i + 1] <= '9') {
      const std::size_t n = static_cast<std::size_t>(tok.text[i + 1] - '0');
      if (n > inputs.size()) {
        throw ParseError(line, tok.column + i, "missing input $" + std::to_string(n));
      }
      out += inputs[n - 1];
      ++i;
    } else {
      out += c;
    }
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text, std::size_t base_column) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    out.push_back({std::string(text.substr(start, i - start)), base_column + start});
  }
  return out;
}

void require_arity(const std::vector<Token>& toks, std::size_t line, std::size_t lo,
                   std::size_t hi, std::string_view usage) {
  const std::size_t n = toks.size() - 1;
  if (n < lo || n > hi) {
    throw ParseError(line, toks.front().column, "usage: " + std::string(usage));
  }
}

void require_number(const Token& tok, const std::string& value, std::size_t line) {
  if (!parse_double(value)) throw ParseError(line, tok.column, "expected a number, got '" + value + "'");
}

void require_metric(const Token& tok, const std::string& value, std::size_t line) {
  if (!is_metric(value)) throw ParseError(line, tok.column, "unknown metric '" + value + "'");
}

bool compare(double a, std::string_view op, double b) {
  if (op == "<") return a < b;
  if (op == "<=") return a <= b;
  if (op == ">") return a > b;
  if (op == ">=") return a >= b;
  if (op == "==") return a == b;
  return a != b;
}

std::vector<std::string> devices_for(const ClusterTopology& topo, std::string_view metric,
                                     std::string_view target) {
  const bool gpu_metric = is_gpu_metric(metric);
  if (target == "all") return gpu_metric ? topo.gpu_ids() : topo.server_ids();
  if (gpu_metric) {
    if (topo.find_gpu(target)) return {std::string(target)};
    if (const ServerSpec* s = topo.find_server(target)) {
      std::vector<std::string> out;
      for (const auto& g : s->gpus) out.push_back(g.id);
      return out;
    }
  } else {
    if (topo.find_server(target)) return {std::string(target)};
    if (const ServerSpec* s = topo.server_of_gpu(target)) return {s->id};
  }
  throw NotFoundError("unknown target " + std::string(target));
}

std::vector<std::string> gpus_for(const ClusterTopology& topo, std::string_view target) {
  return devices_for(topo, "freq_mhz", target);
}

}  // namespace

std::string_view to_string(Verb verb) {
  for (const auto& v : kVerbs)
    if (v.verb == verb) return v.name;
  return "unknown";
}

bool is_mutating(Verb verb) {
  return verb == Verb::Wait || verb == Verb::SetFrequency || verb == Verb::ClearFault ||
         verb == Verb::RestartJob;
}

bool ScriptProgram::mutating() const {
  return std::any_of(statements.begin(), statements.end(),
                     [](const Statement& s) { return is_mutating(s.verb); });
}

std::string_view to_string(ScriptStatus status) {
  switch (status) {
    case ScriptStatus::Ok: return "ok";
    case ScriptStatus::Timeout: return "timeout";
    case ScriptStatus::RuntimeError: return "runtime";
  }
  return "unknown";
}

ScriptProgram compile_script(std::string_view source, std::span<const std::string> inputs,
                             const ScriptLimits& limits) {
  ScriptProgram prog;
  std::size_t line_no = 0;
  for (const auto& raw_line : split(source, '\n')) {
    ++line_no;
    std::string_view line = raw_line;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t offset = 0;
    for (const auto& piece : split(line, ';')) {
      const std::size_t column = offset + 1;
      offset += piece.size() + 1;
      auto raw = tokenize(piece, column);
      if (raw.empty()) continue;
      std::vector<std::string> words;
      for (const auto& t : raw) words.push_back(substitute(t, line_no, inputs));

      const auto* vn = std::find_if(std::begin(kVerbs), std::end(kVerbs),
                                    [&](const VerbName& v) { return v.name == words[0]; });
      if (vn == std::end(kVerbs)) {
        throw ParseError(line_no, raw[0].column, "unknown verb '" + words[0] + "'");
      }
      switch (vn->verb) {
        case Verb::Read:
          require_arity(raw, line_no, 2, 2, "read <metric> <target>");
          require_metric(raw[1], words[1], line_no);
          break;
        case Verb::Find:
        case Verb::Count:
          require_arity(raw, line_no, 3, 4,
                        std::string(vn->name) + " <metric> <op> <value|nominal> [target]");
          require_metric(raw[1], words[1], line_no);
          if (std::find(std::begin(kOps), std::end(kOps), words[2]) == std::end(kOps)) {
            throw ParseError(line_no, raw[2].column, "unknown operator '" + words[2] + "'");
          }
          if (words[3] != "nominal") require_number(raw[3], words[3], line_no);
          break;
        case Verb::Echo:
          break;
        case Verb::Wait:
          require_arity(raw, line_no, 1, 1, "wait <seconds>");
          require_number(raw[1], words[1], line_no);
          if (*parse_double(words[1]) < 0) {
            throw ParseError(line_no, raw[1].column, "wait needs a non-negative duration");
          }
          break;
        case Verb::SetFrequency:
          require_arity(raw, line_no, 1, 2, "set_frequency <mhz> [target]");
          require_number(raw[1], words[1], line_no);
          break;
        case Verb::ClearFault:
          require_arity(raw, line_no, 1, 1, "clear_fault <fault-id|device>");
          break;
        case Verb::RestartJob:
          require_arity(raw, line_no, 1, 1, "restart_job <job-id>");
          break;
      }
      if (prog.statements.size() >= limits.max_statements) {
        throw ParseError(line_no, raw[0].column,
                         "program exceeds " + std::to_string(limits.max_statements) + " statements");
      }
      words.erase(words.begin());
      prog.statements.push_back({vn->verb, std::move(words), line_no});
    }
  }
  return prog;
}

ScriptOutcome run_script(Cluster& cluster, const ScriptProgram& program,
                         const ScriptLimits& limits) {
  ScriptOutcome out;
  const auto& topo = cluster.topology();
  for (const auto& st : program.statements) {
    const auto& a = st.args;
    try {
      switch (st.verb) {
        case Verb::Read: {
          const DeviceState state = cluster.state();
          for (const auto& d : devices_for(topo, a[0], a[1])) {
            out.output += d + " " + a[0] + " " + format_number(metric_value(state, d, a[0])) + "\n";
          }
          break;
        }
        case Verb::Find:
        case Verb::Count: {
          const DeviceState state = cluster.state();
          const std::string target = a.size() > 3 ? a[3] : "all";
          std::vector<std::string> hits;
          for (const auto& d : devices_for(topo, a[0], target)) {
            const double ref =
                a[2] == "nominal" ? nominal_metric_value(topo, d, a[0]) : *parse_double(a[2]);
            if (compare(metric_value(state, d, a[0]), a[1], ref)) hits.push_back(d);
          }
          if (st.verb == Verb::Count) {
            out.output += std::to_string(hits.size()) + "\n";
          } else if (hits.empty()) {
            out.output += "none\n";
          } else {
            for (const auto& h : hits) out.output += h + "\n";
          }
          break;
        }
        case Verb::Echo:
          out.output += join(a, " ") + "\n";
          break;
        case Verb::Wait: {
          const double s = *parse_double(a[0]);
          if (out.waited_s + s > limits.max_wait_s) {
            out.status = ScriptStatus::Timeout;
            out.error = "line " + std::to_string(st.line) + ": wait budget of " +
                        format_number(limits.max_wait_s) + " s exceeded";
            return out;
          }
          cluster.advance(s);
          out.waited_s += s;
          break;
        }
        case Verb::SetFrequency: {
          const double mhz = *parse_double(a[0]);
          for (const auto& g : gpus_for(topo, a.size() > 1 ? a[1] : "all")) {
            cluster.set_frequency(g, mhz);
            out.output += "set " + g + " freq_mhz " + format_number(mhz) + "\n";
          }
          break;
        }
        case Verb::ClearFault:
          if (topo.has_device(a[0])) {
            const auto n = cluster.clear_faults_on(a[0]);
            out.output += "cleared " + std::to_string(n) + " faults on " + a[0] + "\n";
          } else {
            cluster.clear_fault(a[0]);
            out.output += "cleared " + a[0] + "\n";
          }
          break;
        case Verb::RestartJob: {
          auto spec = cluster.find_job_spec(a[0]);
          if (!spec) throw NotFoundError("unknown job " + a[0]);
          spec->start_s.reset();
          const JobRun run = cluster.run_job(*spec);
          if (run.status == JobStatus::Failed) {
            out.output += "job " + a[0] + " failed: " + run.failure + "\n";
          } else {
            double sum = 0;
            for (const auto& it : run.iterations) sum += it.rate;
            out.output += "job " + a[0] + " restarted: " + std::to_string(run.iterations.size()) +
                          " iterations, mean rate " +
                          format_number(sum / static_cast<double>(run.iterations.size())) +
                          " per s\n";
          }
          break;
        }
      }
    } catch (const std::exception& e) {
      out.status = ScriptStatus::RuntimeError;
      out.error = "line " + std::to_string(st.line) + ": " + e.what();
      return out;
    }
  }
  return out;
}

}  // namespace cdiag::sim
