// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/kb/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::kb {

std::string_view to_string(Split s) {
  return s == Split::Retained80 ? "retained80" : "heldout20";
}

std::string_view to_string(Visibility v) { return v == Visibility::FairEval ? "faireval" : "full"; }

Visibility visibility_from_string(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "faireval" || n == "fair") return Visibility::FairEval;
  if (n == "full") return Visibility::Full;
  throw MisuseError("unknown visibility: " + std::string(name));
}

std::size_t heldout_count(std::size_t n, double fraction) {
  if (!(fraction > 0 && fraction < 1)) throw MisuseError("held-out fraction must be in (0, 1)");
  if (n == 0) throw MisuseError("cannot split an empty corpus");
  auto h = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  h = std::max<std::size_t>(h, 1);
  if (n >= 2) h = std::min(h, n - 1);
  return h;
}

KnowledgeBase::KnowledgeBase(std::vector<DiagnosisRecord> corpus, Bm25Params params)
    : params_(params), records_(std::move(corpus)) {
  if (records_.empty()) throw MisuseError("empty corpus");
  for (const auto& r : records_) {
    const auto why = validate_record(r);
    if (!why.empty()) throw MisuseError("record " + std::to_string(r.id) + ": " + why);
  }
  splits_.assign(records_.size(), Split::Retained80);
  rebuild_locked();
}

void KnowledgeBase::rebuild_locked() {
  full_ = std::make_shared<const Bm25Index>(records_, params_);
  if (split_) {
    std::vector<DiagnosisRecord> held;
    for (std::size_t i = 0; i < records_.size(); ++i)
      if (splits_[i] == Split::Heldout20) held.push_back(records_[i]);
    fair_ = std::make_shared<const Bm25Index>(std::move(held), params_);
  }
  ++generation_;
}

void KnowledgeBase::split(double heldout_fraction, std::uint64_t seed) {
  std::lock_guard lock(mu_);
  const std::size_t n = records_.size();
  const std::size_t h = heldout_count(n, heldout_fraction);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  splits_.assign(n, Split::Retained80);
  for (std::size_t i = 0; i < h; ++i) splits_[order[i]] = Split::Heldout20;
  split_ = true;
  rebuild_locked();
}

bool KnowledgeBase::is_split() const {
  std::lock_guard lock(mu_);
  return split_;
}

Split KnowledgeBase::split_of(std::uint32_t id) const {
  std::lock_guard lock(mu_);
  if (!split_) throw MisuseError("corpus has not been split");
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (records_[i].id == id) return splits_[i];
  throw NotFoundError("unknown record " + std::to_string(id));
}

std::vector<std::uint32_t> KnowledgeBase::ids_in(Split s) const {
  std::lock_guard lock(mu_);
  if (!split_) throw MisuseError("corpus has not been split");
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (splits_[i] == s) out.push_back(records_[i].id);
  return out;
}

std::shared_ptr<const Bm25Index> KnowledgeBase::index(Visibility v) const {
  std::lock_guard lock(mu_);
  if (v == Visibility::Full) return full_;
  if (!split_) throw MisuseError("FairEval index needs a split corpus");
  return fair_;
}

std::uint64_t KnowledgeBase::generation() const {
  std::lock_guard lock(mu_);
  return generation_;
}

std::vector<RetrievalHit> KnowledgeBase::retrieve(Visibility v, std::string_view query,
                                                  std::size_t k, std::string_view caller) const {
  const auto idx = index(v);
  auto hits = idx->retrieve(query, k);
  RetrievalAudit entry{std::string(caller), v, std::string(query), {}};
  for (const auto& h : hits) entry.returned_ids.push_back(h.record_id);
  std::lock_guard lock(mu_);
  audit_.push_back(std::move(entry));
  return hits;
}

std::vector<RetrievalAudit> KnowledgeBase::audit_log() const {
  std::lock_guard lock(mu_);
  return audit_;
}

void KnowledgeBase::clear_audit_log() {
  std::lock_guard lock(mu_);
  audit_.clear();
}

AppendResult KnowledgeBase::append_operational_record(DiagnosisRecord record) {
  const auto why = validate_record(record);
  if (!why.empty()) throw MisuseError("invalid operational record: " + why);
  std::lock_guard lock(mu_);
  AppendResult res;
  std::uint32_t max_id = 0;
  for (const auto& r : records_) {
    max_id = std::max(max_id, r.id);
    if (r.problemkey == record.problemkey && r.result == record.result) res.duplicate = true;
  }
  record.id = max_id + 1;
  res.id = record.id;
  if (res.duplicate) {
    res.warning = "duplicate problemkey/result pair: " + record.problemkey + " / " + record.result;
    duplicates_.push_back(record.id);
  }
  records_.push_back(std::move(record));
  splits_.push_back(Split::Retained80);
  // The held-out side never changes after a split, so only Full is rebuilt.
  full_ = std::make_shared<const Bm25Index>(records_, params_);
  ++generation_;
  return res;
}

std::vector<std::uint32_t> KnowledgeBase::flagged_duplicates() const {
  std::lock_guard lock(mu_);
  return duplicates_;
}

std::optional<DiagnosisRecord> KnowledgeBase::record(std::uint32_t id) const {
  std::lock_guard lock(mu_);
  for (const auto& r : records_)
    if (r.id == id) return r;
  return std::nullopt;
}

std::vector<DiagnosisRecord> KnowledgeBase::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t KnowledgeBase::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::shared_ptr<KnowledgeBase> load_knowledge_base(const std::string& corpus_path,
                                                   double heldout_fraction, std::uint64_t seed) {
  auto kb = std::make_shared<KnowledgeBase>(ingest_file(corpus_path).records);
  kb->split(heldout_fraction, seed);
  return kb;
}

}  // namespace cdiag::kb
