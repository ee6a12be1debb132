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

#ifndef SBSTAR_INCIDENCE_H_
#define SBSTAR_INCIDENCE_H_

#include <bit>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbstar/corpus.h"

namespace sbstar {

using EntityId = std::uint32_t;

// Fixed-size bitset over positions [0, size).
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t size) : size_(size), words_((size + 63) / 64) {}

  std::size_t size() const { return size_; }

  bool Test(std::size_t pos) const {
    return (words_[pos >> 6] >> (pos & 63)) & 1u;
  }
  void Set(std::size_t pos) { words_[pos >> 6] |= std::uint64_t{1} << (pos & 63); }

  std::size_t Count() const {
    std::size_t n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
  }

  // Calls fn(pos) for every set bit in ascending order.
  template <typename Fn>
  void ForEach(Fn &&fn) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w != 0) {
        fn(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

  std::span<const std::uint64_t> words() const { return words_; }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// One annotation record: the entity labels linked in a document.
struct AnnotationRecord {
  std::string external_id;
  std::vector<std::string> entities;
};

// Boolean entity x document presence matrix. Entity ids are assigned in
// ascending label order. Immutable after construction.
class EntityIncidenceMatrix {
 public:
  EntityIncidenceMatrix() = default;

  // Builds from (doc, label) memberships over `num_docs` documents.
  EntityIncidenceMatrix(std::size_t num_docs,
                        const std::vector<std::vector<std::string>> &entities_by_doc);

  std::size_t num_entities() const { return labels_.size(); }
  std::size_t num_docs() const { return num_docs_; }

  const std::string &label(EntityId e) const { return labels_.at(e); }
  const std::vector<std::string> &labels() const { return labels_; }
  std::optional<EntityId> Find(const std::string &label) const;

  bool Present(EntityId e, DocIndex d) const { return rows_[e].Test(d); }
  std::size_t df(EntityId e) const { return df_.at(e); }
  const Bitset &row(EntityId e) const { return rows_.at(e); }

  // Entities present in document d, ascending id.
  std::vector<EntityId> EntitiesOf(DocIndex d) const;

 private:
  std::size_t num_docs_ = 0;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, EntityId> index_;
  std::vector<Bitset> rows_;
  std::vector<std::size_t> df_;
};

struct AnnotationReport {
  std::size_t records = 0;
  std::vector<std::string> unmatched_ids;
};

// Builds the matrix over every document of `store`. Records for unknown
// external ids are listed in `report` and otherwise ignored; documents
// without a record get an empty entity row.
EntityIncidenceMatrix BuildIncidence(const std::vector<AnnotationRecord> &records,
                                     const DocumentStore &store,
                                     AnnotationReport *report = nullptr);

std::vector<AnnotationRecord> ParseAnnotations(std::string_view text);

// Reads an annotations JSONL file: {"external_id": str, "entities": [str]}.
EntityIncidenceMatrix LoadAnnotations(const std::filesystem::path &path,
                                      const DocumentStore &store,
                                      AnnotationReport *report = nullptr);

// Marks a lexicon entry present in a document iff its token sequence occurs
// contiguously in the document's title + body tokens, case-insensitively.
std::vector<AnnotationRecord> AnnotateDictionary(
    const DocumentStore &store, const std::vector<std::string> &lexicon);

// Entities whose df restricted to `candidates` lies in
// [min_df, max_df_ratio * |candidates|], ordered by descending restricted df
// then ascending label.
std::vector<EntityId> FilterEntityPool(const EntityIncidenceMatrix &matrix,
                                       std::span<const DocIndex> candidates,
                                       std::size_t min_df, double max_df_ratio);

}  // namespace sbstar

#endif  // SBSTAR_INCIDENCE_H_
