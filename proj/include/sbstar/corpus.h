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

#ifndef SBSTAR_CORPUS_H_
#define SBSTAR_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sbstar {

// Dense document handle, contiguous from 0 within a DocumentStore.
using DocIndex = std::uint32_t;

struct Document {
  DocIndex doc_index = 0;
  std::string external_id;
  std::string title;
  std::string body;
};

// Immutable collection of documents with unique external ids.
class DocumentStore {
 public:
  DocumentStore() = default;

  // Appends a document and assigns the next doc_index. Throws
  // InvalidArgument on a duplicate external id.
  DocIndex Add(std::string external_id, std::string title, std::string body);

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }

  const Document &doc(DocIndex index) const { return docs_.at(index); }
  const std::vector<Document> &docs() const { return docs_; }

  std::optional<DocIndex> Find(std::string_view external_id) const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, DocIndex> by_id_;
};

struct Topic {
  std::string topic_id;
  // The topic title doubles as the seed document for active learning.
  std::string title_text;
};

// Binary relevance judgments: topic_id -> external_id -> {0, 1}.
class Qrels {
 public:
  void Set(const std::string &topic_id, const std::string &external_id,
           int label);

  bool HasTopic(const std::string &topic_id) const {
    return judgments_.count(topic_id) > 0;
  }

  // Judgments for one topic. Throws InvalidArgument if the topic is unknown.
  const std::map<std::string, int> &ForTopic(const std::string &topic_id) const;

  // Doc indices judged relevant for the topic, ascending. Unresolvable ids
  // are skipped.
  std::vector<DocIndex> Relevant(const std::string &topic_id,
                                 const DocumentStore &store) const;

  // True iff the document is judged relevant. Unjudged documents are
  // non-relevant.
  bool IsRelevant(const std::string &topic_id,
                  std::string_view external_id) const;

  std::vector<std::string> TopicIds() const;

  const std::map<std::string, std::map<std::string, int>> &judgments() const {
    return judgments_;
  }

 private:
  std::map<std::string, std::map<std::string, int>> judgments_;
};

// Judged ids that do not resolve against a store.
struct QrelsReport {
  std::size_t judged = 0;
  std::vector<std::pair<std::string, std::string>> unmatched;  // (topic, id)
};

QrelsReport ResolveQrels(const Qrels &qrels, const DocumentStore &store);

// Loaders. Malformed records raise FormatError naming "line N: ...".
// Non-fatal conditions are appended to `warnings` when given.
DocumentStore LoadCorpus(const std::filesystem::path &path,
                         std::vector<std::string> *warnings = nullptr);
Qrels LoadQrels(const std::filesystem::path &path);
std::vector<Topic> LoadTopics(const std::filesystem::path &path);

// Parsers over in-memory text, used by the loaders.
DocumentStore ParseCorpus(std::string_view text,
                          std::vector<std::string> *warnings = nullptr);
Qrels ParseQrels(std::string_view text);
std::vector<Topic> ParseTopics(std::string_view text);

// Reads the whole file. Throws Error if unreadable.
std::string ReadFile(const std::filesystem::path &path);

}  // namespace sbstar

#endif  // SBSTAR_CORPUS_H_
