// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Okapi BM25 over problemkey + rawtext + result.
//
//   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
//   score(q, d) = sum over distinct query terms t of
//                 idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cdiag/kb/record.hpp"

namespace cdiag::kb {

/// Case-folded maximal runs of ASCII letters and digits.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct RetrievalHit {
  std::uint32_t record_id = 0;
  double score = 0;
  std::vector<std::string> matched_terms;  // query order
};

class Bm25Index {
 public:
  struct Posting {
    std::uint32_t record_id;
    std::uint32_t tf;
  };

  explicit Bm25Index(std::vector<DiagnosisRecord> records, Bm25Params params = {});

  /// k >= 1. Ordered by score descending, then record id ascending.
  std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k) const;
  /// Score of one record (0 when it shares no term with the query).
  double score(std::string_view query, std::uint32_t record_id) const;

  std::size_t size() const { return records_.size(); }
  bool contains(std::uint32_t record_id) const;
  bool has_term(std::string_view term) const;
  const std::vector<DiagnosisRecord>& records() const { return records_; }
  const DiagnosisRecord* record(std::uint32_t id) const;
  double average_length() const { return avgdl_; }
  const Bm25Params& params() const { return params_; }

  /// Single-file text layout:
  ///   CDKBIDX 1
  ///   k1 <v>
  ///   b <v>
  ///   docs <N>
  ///   <record json>\t<token count>        (N lines, ascending id)
  ///   terms <T>
  ///   <term> <df> <id>:<tf> ...           (T lines, terms ascending)
  std::string serialize() const;
  /// Throws ParseError on malformed or inconsistent input.
  static Bm25Index deserialize(std::string_view text);

 private:
  double idf(std::size_t df) const;
  double term_weight(std::uint32_t tf, std::size_t doc) const;

  Bm25Params params_;
  std::vector<DiagnosisRecord> records_;  // ascending id
  std::vector<std::size_t> lengths_;
  double avgdl_ = 0;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
};

}  // namespace cdiag::kb
