// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Corpus with a deterministic held-out split and two index views. FairEval
// sees only the held-out side; Full sees everything. Appends publish a new
// Full index generation; readers keep the generation they pinned.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdiag/kb/index.hpp"
#include "cdiag/kb/record.hpp"

namespace cdiag::kb {

enum class Split { Retained80, Heldout20 };
enum class Visibility { FairEval, Full };

std::string_view to_string(Split s);
std::string_view to_string(Visibility v);
Visibility visibility_from_string(std::string_view name);

/// Number held out for n records: round(n * fraction), at least 1, and at most
/// n - 1 when n >= 2.
std::size_t heldout_count(std::size_t n, double fraction);

struct RetrievalAudit {
  std::string caller;
  Visibility visibility;
  std::string query;
  std::vector<std::uint32_t> returned_ids;
};

struct AppendResult {
  std::uint32_t id = 0;
  bool duplicate = false;
  std::string warning;
};

class KnowledgeBase {
 public:
  /// Throws MisuseError on an empty corpus or an invalid record.
  explicit KnowledgeBase(std::vector<DiagnosisRecord> corpus, Bm25Params params = {});

  /// fraction in (0, 1). Rebuilds both indexes.
  void split(double heldout_fraction, std::uint64_t seed);
  bool is_split() const;
  Split split_of(std::uint32_t id) const;
  std::vector<std::uint32_t> ids_in(Split s) const;

  /// FairEval before split() throws MisuseError.
  std::shared_ptr<const Bm25Index> index(Visibility v) const;
  std::uint64_t generation() const;

  /// Retrieval through the current generation; recorded in the audit log.
  std::vector<RetrievalHit> retrieve(Visibility v, std::string_view query, std::size_t k,
                                     std::string_view caller = "") const;
  std::vector<RetrievalAudit> audit_log() const;
  void clear_audit_log();

  /// Fresh id, Retained80, Full index only. Duplicate (problemkey, result)
  /// pairs are appended and flagged.
  AppendResult append_operational_record(DiagnosisRecord record);
  std::vector<std::uint32_t> flagged_duplicates() const;

  std::optional<DiagnosisRecord> record(std::uint32_t id) const;
  std::vector<DiagnosisRecord> records() const;
  std::size_t size() const;

 private:
  void rebuild_locked();

  Bm25Params params_;
  mutable std::mutex mu_;
  std::vector<DiagnosisRecord> records_;
  std::vector<Split> splits_;  // parallel to records_
  bool split_ = false;
  std::uint64_t generation_ = 0;
  std::shared_ptr<const Bm25Index> full_;
  std::shared_ptr<const Bm25Index> fair_;
  std::vector<std::uint32_t> duplicates_;
  mutable std::vector<RetrievalAudit> audit_;
};

/// Ingests a corpus file and splits it with the given seed.
std::shared_ptr<KnowledgeBase> load_knowledge_base(const std::string& corpus_path,
                                                   double heldout_fraction = 0.2,
                                                   std::uint64_t seed = 7);

}  // namespace cdiag::kb
