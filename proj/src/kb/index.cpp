// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/kb/index.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::kb {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::vector<std::string> document_tokens(const DiagnosisRecord& r) {
  return tokenize(r.problemkey + " " + r.rawtext + " " + r.result);
}

std::vector<std::string> distinct(std::vector<std::string> terms) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& t : terms)
    if (seen.insert(t).second) out.push_back(std::move(t));
  return out;
}

}  // namespace

Bm25Index::Bm25Index(std::vector<DiagnosisRecord> records, Bm25Params params)
    : params_(params), records_(std::move(records)) {
  if (!(params_.k1 >= 0) || !(params_.b >= 0 && params_.b <= 1)) {
    throw MisuseError("BM25 needs k1 >= 0 and b in [0, 1]");
  }
  std::sort(records_.begin(), records_.end(),
            [](const DiagnosisRecord& a, const DiagnosisRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].id == records_[i - 1].id) {
      throw MisuseError("duplicate record id " + std::to_string(records_[i].id));
    }
  }
  double total = 0;
  for (const auto& r : records_) {
    std::map<std::string, std::uint32_t> tf;
    const auto toks = document_tokens(r);
    for (const auto& t : toks) ++tf[t];
    for (const auto& [term, n] : tf) postings_[term].push_back({r.id, n});
    lengths_.push_back(toks.size());
    total += static_cast<double>(toks.size());
  }
  avgdl_ = records_.empty() ? 0 : total / static_cast<double>(records_.size());
}

double Bm25Index::idf(std::size_t df) const {
  const double n = static_cast<double>(records_.size());
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double Bm25Index::term_weight(std::uint32_t tf, std::size_t doc) const {
  const double f = tf;
  const double norm =
      avgdl_ > 0 ? static_cast<double>(lengths_[doc]) / avgdl_ : 0.0;
  return f * (params_.k1 + 1) / (f + params_.k1 * (1 - params_.b + params_.b * norm));
}

const DiagnosisRecord* Bm25Index::record(std::uint32_t id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const DiagnosisRecord& r, std::uint32_t v) { return r.id < v; });
  return it != records_.end() && it->id == id ? &*it : nullptr;
}

bool Bm25Index::contains(std::uint32_t record_id) const { return record(record_id) != nullptr; }

bool Bm25Index::has_term(std::string_view term) const {
  return postings_.find(to_lower(term)) != postings_.end();
}

std::vector<RetrievalHit> Bm25Index::retrieve(std::string_view query, std::size_t k) const {
  if (k == 0) throw MisuseError("retrieve needs k >= 1");
  std::map<std::uint32_t, RetrievalHit> acc;
  for (const auto& term : distinct(tokenize(query))) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(it->second.size());
    for (const auto& p : it->second) {
      const std::size_t doc = static_cast<std::size_t>(record(p.record_id) - records_.data());
      auto& hit = acc[p.record_id];
      hit.record_id = p.record_id;
      hit.score += w * term_weight(p.tf, doc);
      hit.matched_terms.push_back(term);
    }
  }
  std::vector<RetrievalHit> hits;
  hits.reserve(acc.size());
  for (auto& [id, h] : acc) hits.push_back(std::move(h));
  std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.record_id < b.record_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

double Bm25Index::score(std::string_view query, std::uint32_t record_id) const {
  const DiagnosisRecord* r = record(record_id);
  if (!r) throw NotFoundError("record " + std::to_string(record_id) + " not in index");
  const std::size_t doc = static_cast<std::size_t>(r - records_.data());
  double s = 0;
  for (const auto& term : distinct(tokenize(query))) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    for (const auto& p : it->second) {
      if (p.record_id == record_id) s += idf(it->second.size()) * term_weight(p.tf, doc);
    }
  }
  return s;
}

std::string Bm25Index::serialize() const {
  std::string out = "CDKBIDX 1\n";
  out += "k1 " + format_number(params_.k1) + "\n";
  out += "b " + format_number(params_.b) + "\n";
  out += "docs " + std::to_string(records_.size()) + "\n";
  for (std::size_t i = 0; i < records_.size(); ++i) {
    out += to_json(records_[i]).dump() + "\t" + std::to_string(lengths_[i]) + "\n";
  }
  out += "terms " + std::to_string(postings_.size()) + "\n";
  for (const auto& [term, list] : postings_) {
    out += term + " " + std::to_string(list.size());
    for (const auto& p : list) {
      out += " " + std::to_string(p.record_id) + ":" + std::to_string(p.tf);
    }
    out += "\n";
  }
  return out;
}

Bm25Index Bm25Index::deserialize(std::string_view text) {
  const auto lines = split(text, '\n');
  std::size_t at = 0;
  auto next = [&](const char* what) -> const std::string& {
    if (at >= lines.size()) throw ParseError(at + 1, 1, std::string("expected ") + what);
    return lines[at++];
  };
  auto keyed = [&](const char* key) {
    const auto& line = next(key);
    const auto parts = split_whitespace(line);
    if (parts.size() != 2 || parts[0] != key) {
      throw ParseError(at, 1, std::string("expected '") + key + " <value>'");
    }
    auto v = parse_double(parts[1]);
    if (!v) throw ParseError(at, parts[0].size() + 2, "not a number");
    return *v;
  };
  if (next("header") != "CDKBIDX 1") throw ParseError(1, 1, "unsupported index header");
  Bm25Params params;
  params.k1 = keyed("k1");
  params.b = keyed("b");
  const auto ndocs = static_cast<std::size_t>(keyed("docs"));
  std::vector<DiagnosisRecord> records;
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < ndocs; ++i) {
    const auto& line = next("document");
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(at, 1, "document line needs a token count");
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line.substr(0, tab))));
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError(at, 1, "malformed document record");
    }
    auto len = parse_int(line.substr(tab + 1));
    if (!len || *len < 0) throw ParseError(at, tab + 2, "malformed token count");
    lengths.push_back(static_cast<std::size_t>(*len));
  }
  const auto nterms = static_cast<std::size_t>(keyed("terms"));
  std::map<std::string, std::vector<Posting>, std::less<>> postings;
  for (std::size_t i = 0; i < nterms; ++i) {
    const auto parts = split_whitespace(next("postings"));
    if (parts.size() < 3) throw ParseError(at, 1, "malformed postings line");
    auto df = parse_int(parts[1]);
    if (!df || static_cast<std::size_t>(*df) != parts.size() - 2) {
      throw ParseError(at, parts[0].size() + 2, "document frequency does not match postings");
    }
    auto& list = postings[parts[0]];
    for (std::size_t p = 2; p < parts.size(); ++p) {
      const auto colon = parts[p].find(':');
      auto id = colon == std::string::npos ? std::nullopt : parse_int(parts[p].substr(0, colon));
      auto tf = colon == std::string::npos ? std::nullopt : parse_int(parts[p].substr(colon + 1));
      if (!id || !tf) throw ParseError(at, 1, "malformed posting " + parts[p]);
      list.push_back({static_cast<std::uint32_t>(*id), static_cast<std::uint32_t>(*tf)});
    }
  }
  Bm25Index idx(std::move(records), params);
  if (idx.lengths_ != lengths) throw ParseError(4, 1, "document lengths do not match records");
  bool same = idx.postings_.size() == postings.size();
  for (auto a = idx.postings_.begin(), b = postings.begin(); same && a != idx.postings_.end();
       ++a, ++b) {
    same = a->first == b->first && a->second.size() == b->second.size();
    for (std::size_t i = 0; same && i < a->second.size(); ++i) {
      same = a->second[i].record_id == b->second[i].record_id && a->second[i].tf == b->second[i].tf;
    }
  }
  if (!same) throw ParseError(5 + ndocs, 1, "postings do not match documents");
  return idx;
}

}  // namespace cdiag::kb
