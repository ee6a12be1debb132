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

#ifndef SBSTAR_FEATURES_H_
#define SBSTAR_FEATURES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sbstar/corpus.h"

namespace sbstar {

// Lowercased ASCII-alphanumeric runs (bytes >= 0x80 are kept as word
// characters). Tokens shorter than `min_length` are dropped.
std::vector<std::string> Tokenize(std::string_view text,
                                  std::size_t min_length = 2);

using TermId = std::uint32_t;

struct FeatureEntry {
  TermId term;
  double weight;
};

using SparseVector = std::vector<FeatureEntry>;  // sorted by term

double Dot(std::span<const double> weights, const SparseVector &x);
double SquaredNorm(const SparseVector &x);

// Log-TF x log-IDF document vectors over a fixed vocabulary:
//   tf = 1 + log(count), idf = log(N / df), weight = tf * idf.
// Terms are allocated ids in ascending lexicographic order, so the
// vocabulary is stable for a given store.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  // Rebuilds from a cached vocabulary. `terms` and `idf` must align.
  FeatureMatrix(std::vector<std::string> terms, std::vector<double> idf,
                std::vector<SparseVector> rows);

  std::size_t num_docs() const { return rows_.size(); }
  std::size_t vocabulary_size() const { return terms_.size(); }

  const SparseVector &row(DocIndex doc) const { return rows_.at(doc); }
  const std::vector<SparseVector> &rows() const { return rows_; }
  const std::vector<std::string> &terms() const { return terms_; }
  const std::vector<double> &idf() const { return idf_; }

  // Returns the term id, or -1 when the term is out of vocabulary.
  std::int64_t TermIndex(std::string_view term) const;

  // Weighted vector for arbitrary text against this vocabulary. Unknown
  // terms are dropped.
  SparseVector Vectorize(std::string_view text) const;

  // Weight of `term` in document `doc`; 0 when absent.
  double Weight(DocIndex doc, std::string_view term) const;

 private:
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::unordered_map<std::string, TermId> index_;
  std::vector<SparseVector> rows_;
};

// Throws InvalidArgument on an empty store.
FeatureMatrix BuildFeatures(const DocumentStore &store);

}  // namespace sbstar

#endif  // SBSTAR_FEATURES_H_
