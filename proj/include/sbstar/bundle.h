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

#ifndef SBSTAR_BUNDLE_H_
#define SBSTAR_BUNDLE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sbstar/corpus.h"
#include "sbstar/features.h"
#include "sbstar/incidence.h"

namespace sbstar {

// Everything a run needs, built once and shared read-only.
struct CorpusBundle {
  DocumentStore store;
  std::vector<AnnotationRecord> annotations;
  EntityIncidenceMatrix matrix;
  FeatureMatrix features;
  Qrels qrels;
  std::vector<Topic> topics;

  const Topic *FindTopic(const std::string &topic_id) const;
};

// Builds matrix and features over an in-memory corpus.
CorpusBundle MakeBundle(DocumentStore store,
                        std::vector<AnnotationRecord> annotations, Qrels qrels,
                        std::vector<Topic> topics);

struct IngestInputs {
  std::filesystem::path corpus;
  // Either an annotation file or a lexicon (one surface form per line) for
  // the dictionary annotator.
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> lexicon;
  std::filesystem::path qrels;
  std::filesystem::path topics;
};

struct IngestResult {
  std::filesystem::path bundle_dir;
  std::string content_hash;
  bool cache_hit = false;
  std::size_t documents = 0;
  std::size_t entities = 0;
  std::vector<std::string> warnings;
};

// SHA-256 (hex) over the input files' names and bytes.
std::string HashInputs(const IngestInputs &inputs);

// Writes the bundle directory (manifest.json, documents.jsonl,
// annotations.jsonl, qrels.txt, topics.jsonl, features.json). Re-running on
// unchanged inputs is a cache hit and rewrites nothing.
IngestResult IngestBundle(const IngestInputs &inputs,
                          const std::filesystem::path &bundle_dir);

CorpusBundle LoadBundle(const std::filesystem::path &bundle_dir);

}  // namespace sbstar

#endif  // SBSTAR_BUNDLE_H_
