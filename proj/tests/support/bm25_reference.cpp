// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "bm25_reference.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

namespace cdiag::testing {

std::vector<std::string> reference_tokens(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : ' '; });
  static const std::regex word("[a-z0-9]+");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(lower.begin(), lower.end(), word); it != std::sregex_iterator();
       ++it) {
    out.push_back(it->str());
  }
  return out;
}

double reference_bm25(const std::vector<std::vector<std::string>>& docs, std::size_t doc,
                      const std::vector<std::string>& query, double k1, double b) {
  const double n = static_cast<double>(docs.size());
  double total = 0;
  for (const auto& d : docs) total += static_cast<double>(d.size());
  const double avgdl = total / n;
  std::vector<std::string> seen;
  double score = 0;
  for (const auto& term : query) {
    if (std::find(seen.begin(), seen.end(), term) != seen.end()) continue;
    seen.push_back(term);
    double df = 0;
    for (const auto& d : docs)
      if (std::find(d.begin(), d.end(), term) != d.end()) df += 1;
    const double tf = static_cast<double>(std::count(docs[doc].begin(), docs[doc].end(), term));
    if (tf == 0) continue;
    const double idf = std::log(1 + (n - df + 0.5) / (df + 0.5));
    const double len = static_cast<double>(docs[doc].size());
    score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avgdl));
  }
  return score;
}


std::vector<kb::DiagnosisRecord> bm25_fixture_records() {
  // Token streams (problemkey + rawtext + result), avgdl 4.8:
  //   1: alpha alpha beta gamma
  //   2: beta beta beta delta x1
  //   3: gamma alpha delta
  //   4: epsilon x5, beta
  //   5: zeta alpha beta gamma delta zeta
  return {
      {1, "alpha", "Alpha, BETA.", "", "gamma"},
      {2, "beta", "beta/beta delta", "", "x1"},
      {3, "gamma", "ALPHA", "", "delta"},
      {4, "epsilon", "epsilon-epsilon epsilon;epsilon", "", "Beta"},
      {5, "zeta", "alpha beta gamma delta", "", "zeta!"},
  };
}

const std::vector<Bm25FixtureRow>& bm25_fixture_table() {
  // Example: alpha in record 1 has df 3, idf ln(1 + 2.5/3.5) = 0.538996500732687,
  // tf 2, |d| 4, weight 2 * 2.2 / (2 + 1.2 * 0.875) = 1.442622950819672.
  static const std::vector<Bm25FixtureRow> table = {
      {"alpha", {0.7775687223684669, 0, 0.6366670075768655, 0, 0.4889865161286235}},
      {"beta gamma",
       {0.8871672492711365, 0.44807119249126937, 0.6366670075768655, 0.2609899213995538,
        0.7499764375281772}},
      {"delta zeta", {0, 0.5299630398265528, 0.6366670075768655, 0, 2.269919418005271}},
      {"epsilon alpha alpha",
       {0.7775687223684669, 0, 0.6366670075768655, 2.3734222525009803, 0.4889865161286235}},
      {"x1", {0, 1.3630603774139707, 0, 0, 0}},
  };
  return table;
}

}  // namespace cdiag::testing
