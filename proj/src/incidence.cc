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

#include "sbstar/incidence.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "sbstar/error.h"
#include "sbstar/features.h"

namespace sbstar {

using json = nlohmann::json;

EntityIncidenceMatrix::EntityIncidenceMatrix(
    std::size_t num_docs,
    const std::vector<std::vector<std::string>> &entities_by_doc)
    : num_docs_(num_docs) {
  if (entities_by_doc.size() != num_docs) {
    throw InvalidArgument("entity rows do not cover every document");
  }
  std::set<std::string> all;
  for (const auto &labels : entities_by_doc) all.insert(labels.begin(), labels.end());
  labels_.assign(all.begin(), all.end());
  for (EntityId e = 0; e < labels_.size(); ++e) index_.emplace(labels_[e], e);

  rows_.assign(labels_.size(), Bitset(num_docs));
  for (DocIndex d = 0; d < num_docs; ++d) {
    for (const auto &label : entities_by_doc[d]) rows_[index_.at(label)].Set(d);
  }
  df_.reserve(rows_.size());
  for (const auto &row : rows_) df_.push_back(row.Count());
}

std::optional<EntityId> EntityIncidenceMatrix::Find(const std::string &label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<EntityId> EntityIncidenceMatrix::EntitiesOf(DocIndex d) const {
  std::vector<EntityId> out;
  for (EntityId e = 0; e < rows_.size(); ++e) {
    if (rows_[e].Test(d)) out.push_back(e);
  }
  return out;
}

EntityIncidenceMatrix BuildIncidence(const std::vector<AnnotationRecord> &records,
                                     const DocumentStore &store,
                                     AnnotationReport *report) {
  std::vector<std::vector<std::string>> by_doc(store.size());
  std::vector<std::string> unmatched;
  for (const auto &record : records) {
    auto index = store.Find(record.external_id);
    if (!index) {
      unmatched.push_back(record.external_id);
      continue;
    }
    auto &labels = by_doc[*index];
    labels.insert(labels.end(), record.entities.begin(), record.entities.end());
  }
  if (report != nullptr) {
    report->records = records.size();
    report->unmatched_ids = std::move(unmatched);
  }
  return EntityIncidenceMatrix(store.size(), by_doc);
}

std::vector<AnnotationRecord> ParseAnnotations(std::string_view text) {
  std::vector<AnnotationRecord> records;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_number;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_number) + ": ";
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error &e) {
      throw FormatError(where + "invalid JSON (" + e.what() + ")");
    }
    auto id = record.find("external_id");
    if (!record.is_object() || id == record.end() || !id->is_string()) {
      throw FormatError(where + "missing external_id");
    }
    auto entities = record.find("entities");
    if (entities == record.end() || !entities->is_array()) {
      throw FormatError(where + "missing entities array");
    }
    AnnotationRecord out{id->get<std::string>(), {}};
    for (const auto &label : *entities) {
      if (!label.is_string() || label.get_ref<const std::string &>().empty()) {
        throw FormatError(where + "entity labels must be non-empty strings");
      }
      out.entities.push_back(label.get<std::string>());
    }
    records.push_back(std::move(out));
  }
  return records;
}

EntityIncidenceMatrix LoadAnnotations(const std::filesystem::path &path,
                                      const DocumentStore &store,
                                      AnnotationReport *report) {
  std::string text = ReadFile(path);
  std::vector<AnnotationRecord> records;
  try {
    records = ParseAnnotations(text);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return BuildIncidence(records, store, report);
}

std::vector<AnnotationRecord> AnnotateDictionary(
    const DocumentStore &store, const std::vector<std::string> &lexicon) {
  std::vector<std::vector<std::string>> patterns;
  std::vector<std::string> entries;
  for (const auto &entry : lexicon) {
    auto tokens = Tokenize(entry, 1);
    if (tokens.empty()) continue;
    patterns.push_back(std::move(tokens));
    entries.push_back(entry);
  }

  std::vector<AnnotationRecord> records;
  if (patterns.empty()) return records;
  for (const auto &doc : store.docs()) {
    auto tokens = Tokenize(doc.title + " " + doc.body, 1);
    AnnotationRecord record{doc.external_id, {}};
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      auto hit = std::search(tokens.begin(), tokens.end(), patterns[i].begin(),
                             patterns[i].end());
      if (hit != tokens.end()) record.entities.push_back(entries[i]);
    }
    if (!record.entities.empty()) records.push_back(std::move(record));
  }
  return records;
}

std::vector<EntityId> FilterEntityPool(const EntityIncidenceMatrix &matrix,
                                       std::span<const DocIndex> candidates,
                                       std::size_t min_df, double max_df_ratio) {
  if (!(max_df_ratio > 0.0 && max_df_ratio <= 1.0)) {
    throw InvalidArgument("max_df_ratio must lie in (0, 1]");
  }
  const double upper = max_df_ratio * static_cast<double>(candidates.size());
  std::vector<std::pair<std::size_t, EntityId>> kept;
  for (EntityId e = 0; e < matrix.num_entities(); ++e) {
    std::size_t restricted = 0;
    for (DocIndex d : candidates) restricted += matrix.Present(e, d) ? 1 : 0;
    if (restricted < min_df || restricted == 0) continue;
    if (static_cast<double>(restricted) > upper) continue;
    kept.emplace_back(restricted, e);
  }
  std::sort(kept.begin(), kept.end(), [&](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return matrix.label(a.second) < matrix.label(b.second);
  });
  std::vector<EntityId> pool;
  pool.reserve(kept.size());
  for (const auto &entry : kept) pool.push_back(entry.second);
  return pool;
}

}  // namespace sbstar
