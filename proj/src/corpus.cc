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

#include "sbstar/corpus.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sbstar/error.h"

namespace sbstar {

using json = nlohmann::json;

namespace {

// Calls fn(line_number, line) for every non-blank line. Line numbers are
// 1-based.
template <typename Fn>
void ForEachLine(std::string_view text, Fn &&fn) {
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_number;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      fn(line_number, line);
    }
    pos = end + 1;
  }
}

std::string LinePrefix(std::size_t line_number) {
  return "line " + std::to_string(line_number) + ": ";
}

json ParseJsonLine(std::size_t line_number, std::string_view line) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error &e) {
    throw FormatError(LinePrefix(line_number) + "invalid JSON (" + e.what() +
                      ")");
  }
  if (!record.is_object()) {
    throw FormatError(LinePrefix(line_number) + "record is not an object");
  }
  return record;
}

std::string RequiredString(const json &record, const char *key,
                           std::size_t line_number) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) {
    throw FormatError(LinePrefix(line_number) + "missing " + key);
  }
  if (!it->is_string()) {
    throw FormatError(LinePrefix(line_number) + key + " is not a string");
  }
  return it->get<std::string>();
}

std::string OptionalString(const json &record, const char *key,
                           std::size_t line_number) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw FormatError(LinePrefix(line_number) + key + " is not a string");
  }
  return it->get<std::string>();
}

}  // namespace

DocIndex DocumentStore::Add(std::string external_id, std::string title,
                            std::string body) {
  if (by_id_.count(external_id) > 0) {
    throw InvalidArgument("duplicate external_id " + external_id);
  }
  auto index = static_cast<DocIndex>(docs_.size());
  by_id_.emplace(external_id, index);
  docs_.push_back(
      Document{index, std::move(external_id), std::move(title),
               std::move(body)});
  return index;
}

std::optional<DocIndex> DocumentStore::Find(std::string_view external_id) const {
  auto it = by_id_.find(std::string(external_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

void Qrels::Set(const std::string &topic_id, const std::string &external_id,
                int label) {
  if (label != 0 && label != 1) {
    throw InvalidArgument("relevance label must be 0 or 1, got " +
                          std::to_string(label));
  }
  judgments_[topic_id][external_id] = label;
}

const std::map<std::string, int> &Qrels::ForTopic(
    const std::string &topic_id) const {
  auto it = judgments_.find(topic_id);
  if (it == judgments_.end()) {
    throw InvalidArgument("topic " + topic_id + " has no judgments");
  }
  return it->second;
}

std::vector<DocIndex> Qrels::Relevant(const std::string &topic_id,
                                      const DocumentStore &store) const {
  std::vector<DocIndex> relevant;
  for (const auto &[id, label] : ForTopic(topic_id)) {
    if (label != 1) continue;
    if (auto index = store.Find(id)) relevant.push_back(*index);
  }
  std::sort(relevant.begin(), relevant.end());
  return relevant;
}

bool Qrels::IsRelevant(const std::string &topic_id,
                       std::string_view external_id) const {
  auto topic = judgments_.find(topic_id);
  if (topic == judgments_.end()) return false;
  auto it = topic->second.find(std::string(external_id));
  return it != topic->second.end() && it->second == 1;
}

std::vector<std::string> Qrels::TopicIds() const {
  std::vector<std::string> ids;
  ids.reserve(judgments_.size());
  for (const auto &entry : judgments_) ids.push_back(entry.first);
  return ids;
}

QrelsReport ResolveQrels(const Qrels &qrels, const DocumentStore &store) {
  QrelsReport report;
  for (const auto &[topic, labels] : qrels.judgments()) {
    for (const auto &entry : labels) {
      ++report.judged;
      if (!store.Find(entry.first)) {
        report.unmatched.emplace_back(topic, entry.first);
      }
    }
  }
  return report;
}

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream contents;
  contents << in.rdbuf();
  return contents.str();
}

DocumentStore ParseCorpus(std::string_view text,
                          std::vector<std::string> *warnings) {
  DocumentStore store;
  ForEachLine(text, [&](std::size_t line_number, std::string_view line) {
    json record = ParseJsonLine(line_number, line);
    std::string id = RequiredString(record, "external_id", line_number);
    if (id.empty()) {
      throw FormatError(LinePrefix(line_number) + "empty external_id");
    }
    if (store.Find(id)) {
      throw FormatError(LinePrefix(line_number) + "duplicate external_id " +
                        id);
    }
    store.Add(std::move(id), OptionalString(record, "title", line_number),
              OptionalString(record, "body", line_number));
  });
  if (store.empty() && warnings != nullptr) {
    warnings->push_back("corpus is empty");
  }
  return store;
}

DocumentStore LoadCorpus(const std::filesystem::path &path,
                         std::vector<std::string> *warnings) {
  std::string text = ReadFile(path);
  try {
    return ParseCorpus(text, warnings);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Qrels ParseQrels(std::string_view text) {
  Qrels qrels;
  ForEachLine(text, [&](std::size_t line_number, std::string_view line) {
    std::istringstream fields{std::string(line)};
    std::string topic, iteration, id, label, extra;
    if (!(fields >> topic >> iteration >> id >> label) || (fields >> extra)) {
      throw FormatError(LinePrefix(line_number) +
                        "expected \"topic_id 0 external_id {0|1}\"");
    }
    if (label != "0" && label != "1") {
      throw FormatError(LinePrefix(line_number) + "relevance must be 0 or 1");
    }
    qrels.Set(topic, id, label == "1" ? 1 : 0);
  });
  return qrels;
}

Qrels LoadQrels(const std::filesystem::path &path) {
  std::string text = ReadFile(path);
  try {
    return ParseQrels(text);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<Topic> ParseTopics(std::string_view text) {
  std::vector<Topic> topics;
  ForEachLine(text, [&](std::size_t line_number, std::string_view line) {
    json record = ParseJsonLine(line_number, line);
    Topic topic;
    topic.topic_id = RequiredString(record, "topic_id", line_number);
    topic.title_text = RequiredString(record, "title", line_number);
    if (topic.title_text.empty()) {
      throw FormatError(LinePrefix(line_number) + "empty title");
    }
    topics.push_back(std::move(topic));
  });
  return topics;
}

std::vector<Topic> LoadTopics(const std::filesystem::path &path) {
  std::string text = ReadFile(path);
  try {
    return ParseTopics(text);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace sbstar
