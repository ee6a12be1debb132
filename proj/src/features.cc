// Copyright 2026 The SBSTAR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sbstar/features.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "sbstar/error.h"

namespace sbstar {

namespace {

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char Lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

// term -> count for one text.
std::map<std::string, int> CountTerms(std::string_view text) {
  std::map<std::string, int> counts;
  for (auto &token : Tokenize(text)) ++counts[token];
  return counts;
}

std::string DocumentText(const Document &doc) {
  std::string text = doc.title;
  text.push_back(' ');
  text += doc.body;
  return text;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text,
                                  std::size_t min_length) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= min_length && !current.empty()) {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (IsWordByte(c)) {
      current.push_back(Lower(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

double Dot(std::span<const double> weights, const SparseVector &x) {
  double sum = 0.0;
  for (const auto &entry : x) sum += weights[entry.term] * entry.weight;
  return sum;
}

double SquaredNorm(const SparseVector &x) {
  double sum = 0.0;
  for (const auto &entry : x) sum += entry.weight * entry.weight;
  return sum;
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> terms,
                             std::vector<double> idf,
                             std::vector<SparseVector> rows)
    : terms_(std::move(terms)), idf_(std::move(idf)), rows_(std::move(rows)) {
  if (terms_.size() != idf_.size()) {
    throw InvalidArgument("vocabulary and idf sizes differ");
  }
  for (TermId t = 0; t < terms_.size(); ++t) index_.emplace(terms_[t], t);
}

std::int64_t FeatureMatrix::TermIndex(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

SparseVector FeatureMatrix::Vectorize(std::string_view text) const {
  SparseVector vec;
  for (const auto &[term, count] : CountTerms(text)) {
    auto it = index_.find(term);
    if (it == index_.end()) continue;
    double w = (1.0 + std::log(static_cast<double>(count))) * idf_[it->second];
    if (w > 0.0) vec.push_back({it->second, w});
  }
  std::sort(vec.begin(), vec.end(),
            [](const FeatureEntry &a, const FeatureEntry &b) {
              return a.term < b.term;
            });
  return vec;
}

double FeatureMatrix::Weight(DocIndex doc, std::string_view term) const {
  std::int64_t t = TermIndex(term);
  if (t < 0) return 0.0;
  const SparseVector &r = row(doc);
  auto it = std::lower_bound(
      r.begin(), r.end(), static_cast<TermId>(t),
      [](const FeatureEntry &e, TermId id) { return e.term < id; });
  return (it != r.end() && it->term == static_cast<TermId>(t)) ? it->weight
                                                                : 0.0;
}

FeatureMatrix BuildFeatures(const DocumentStore &store) {
  if (store.empty()) throw InvalidArgument("cannot featurize an empty store");

  std::vector<std::map<std::string, int>> counts;
  counts.reserve(store.size());
  std::map<std::string, int> df;
  for (const auto &doc : store.docs()) {
    counts.push_back(CountTerms(DocumentText(doc)));
    for (const auto &entry : counts.back()) ++df[entry.first];
  }

  std::vector<std::string> terms;
  std::vector<double> idf;
  std::unordered_map<std::string, TermId> index;
  terms.reserve(df.size());
  const double n = static_cast<double>(store.size());
  for (const auto &[term, freq] : df) {
    index.emplace(term, static_cast<TermId>(terms.size()));
    terms.push_back(term);
    idf.push_back(std::log(n / static_cast<double>(freq)));
  }

  std::vector<SparseVector> rows(store.size());
  for (std::size_t d = 0; d < counts.size(); ++d) {
    // std::map iteration is lexicographic, matching term id order.
    for (const auto &[term, count] : counts[d]) {
      TermId t = index.at(term);
      double w = (1.0 + std::log(static_cast<double>(count))) * idf[t];
      if (w > 0.0) rows[d].push_back({t, w});
    }
  }
  return FeatureMatrix(std::move(terms), std::move(idf), std::move(rows));
}

}  // namespace sbstar
