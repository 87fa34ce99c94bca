// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/kb/record.hpp"

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/sim/checks.hpp"

namespace cdiag::kb {

namespace {

constexpr const char* kFields[] = {"problemkey", "rawtext", "function", "result"};

}  // namespace

std::string validate_record(const DiagnosisRecord& r) {
  if (trim(r.problemkey).empty()) return "empty field: problemkey";
  if (trim(r.rawtext).empty()) return "empty field: rawtext";
  if (trim(r.result).empty()) return "empty field: result";
  if (!r.function.empty() && !sim::is_registered_tool(r.function)) {
    return "unknown function: " + r.function;
  }
  return {};
}

IngestReport ingest_jsonl(std::string_view text) {
  IngestReport report;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      report.rejected.push_back({line_no, "malformed record"});
      continue;
    }
    if (!j.is_object()) {
      report.rejected.push_back({line_no, "malformed record"});
      continue;
    }
    std::string reason;
    for (const char* f : kFields) {
      if (!j.contains(f)) {
        reason = std::string("missing field: ") + f;
        break;
      }
      if (!j.at(f).is_string()) {
        reason = std::string("field is not a string: ") + f;
        break;
      }
    }
    if (reason.empty()) {
      DiagnosisRecord r;
      r.problemkey = j.at("problemkey").get<std::string>();
      r.rawtext = j.at("rawtext").get<std::string>();
      r.function = j.at("function").get<std::string>();
      r.result = j.at("result").get<std::string>();
      reason = validate_record(r);
      if (reason.empty()) {
        r.id = static_cast<std::uint32_t>(report.records.size() + 1);
        report.records.push_back(std::move(r));
        continue;
      }
    }
    report.rejected.push_back({line_no, reason});
  }
  if (report.records.empty()) {
    throw MisuseError("empty corpus: no valid records among " + std::to_string(line_no) + " lines");
  }
  return report;
}

IngestReport ingest_file(const std::string& path) { return ingest_jsonl(read_file(path)); }

nlohmann::json to_json(const DiagnosisRecord& r) {
  return {{"id", r.id},
          {"problemkey", r.problemkey},
          {"rawtext", r.rawtext},
          {"function", r.function},
          {"result", r.result}};
}

DiagnosisRecord record_from_json(const nlohmann::json& j) {
  DiagnosisRecord r;
  r.id = j.value("id", 0u);
  r.problemkey = j.value("problemkey", "");
  r.rawtext = j.value("rawtext", "");
  r.function = j.value("function", "");
  r.result = j.value("result", "");
  return r;
}

}  // namespace cdiag::kb
