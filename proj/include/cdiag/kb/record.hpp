// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cdiag::kb {

struct DiagnosisRecord {
  std::uint32_t id = 0;
  std::string problemkey;
  std::string rawtext;
  std::string function;  // empty or a registered tool name
  std::string result;
  bool operator==(const DiagnosisRecord&) const = default;
};

/// Empty string when valid, otherwise the first violated rule.
std::string validate_record(const DiagnosisRecord& r);

struct RejectedLine {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct IngestReport {
  std::vector<DiagnosisRecord> records;  // ids 1.. in file order
  std::vector<RejectedLine> rejected;
};

/// One JSON object per line with fields problemkey, rawtext, function, result.
/// Blank lines are ignored. Throws MisuseError("empty corpus: ...") when no
/// line is valid.
IngestReport ingest_jsonl(std::string_view text);
/// Throws IoError when the file cannot be read.
IngestReport ingest_file(const std::string& path);

nlohmann::json to_json(const DiagnosisRecord& r);
/// Lenient: missing fields become empty; ids are kept.
DiagnosisRecord record_from_json(const nlohmann::json& j);

}  // namespace cdiag::kb
