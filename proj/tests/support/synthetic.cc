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

#include "synthetic.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

namespace sbstar::testing {

namespace {

std::string BackgroundWord(std::size_t i) { return "w" + std::to_string(i); }

std::string TopicWord(std::size_t t, std::size_t k) {
  return "t" + std::to_string(t) + "k" + std::to_string(k);
}

}  // namespace

SyntheticCorpus MakeSyntheticCorpus(const SyntheticSpec &spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  const std::size_t n = spec.num_docs;
  std::vector<int> owner(n, -1);  // topic owning each doc, -1 for none
  std::vector<bool> hard(n, false);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  SyntheticCorpus out;
  std::size_t next = 0;
  for (std::size_t t = 0; t < spec.num_topics; ++t) {
    Topic topic;
    topic.topic_id = "T" + std::to_string(t);
    for (std::size_t k = 0; k < spec.topic_words; ++k) {
      if (k > 0) topic.title_text += " ";
      topic.title_text += TopicWord(t, k);
    }
    out.topics.push_back(topic);
    std::vector<DocIndex> rel;
    for (std::size_t i = 0; i < spec.relevant_per_topic && next < n; ++i) {
      std::size_t d = order[next++];
      owner[d] = static_cast<int>(t);
      hard[d] = unit(rng) < spec.hard_fraction;
      rel.push_back(static_cast<DocIndex>(d));
    }
    std::sort(rel.begin(), rel.end());
    out.relevant[topic.topic_id] = rel;
  }

  std::vector<std::vector<std::string>> entities(n);
  for (std::size_t t = 0; t < spec.num_topics; ++t) {
    double noise = spec.topic_entity_noise;
    for (std::size_t k = 0; k < spec.topic_entities; ++k, noise /= 2) {
      std::string label = "Topic " + std::to_string(t) + " concept " + std::to_string(k);
      for (std::size_t d = 0; d < n; ++d) {
        if (owner[d] == static_cast<int>(t) || unit(rng) < noise) {
          entities[d].push_back(label);
        }
      }
    }
  }
  for (std::size_t g = 0; g < spec.generic_entities; ++g) {
    std::string label = "Generic " + std::to_string(g);
    double df = spec.generic_df_min + (spec.generic_df_max - spec.generic_df_min) * unit(rng);
    for (std::size_t d = 0; d < n; ++d) {
      if (unit(rng) < df) entities[d].push_back(label);
    }
  }

  for (std::size_t d = 0; d < n; ++d) {
    std::string body;
    for (std::size_t w = 0; w < spec.words_per_doc; ++w) {
      body += BackgroundWord(pick(spec.background_vocab)) + " ";
    }
    if (owner[d] >= 0 && !hard[d]) {
      std::size_t t = static_cast<std::size_t>(owner[d]);
      std::size_t reps = 3 + pick(4);
      for (std::size_t r = 0; r < reps; ++r) body += TopicWord(t, pick(spec.topic_words)) + " ";
    } else if (spec.num_topics > 0 && unit(rng) < spec.stray_topic_word_rate) {
      body += TopicWord(pick(spec.num_topics), pick(spec.topic_words)) + " ";
    }
    std::string id = "doc" + std::to_string(d);
    out.store.Add(id, "Document " + std::to_string(d), body);
    out.annotations.push_back({id, entities[d]});
  }

  for (const Topic &topic : out.topics) {
    const auto &rel = out.relevant[topic.topic_id];
    for (std::size_t d = 0; d < n; ++d) {
      bool is_rel = std::binary_search(rel.begin(), rel.end(), static_cast<DocIndex>(d));
      out.qrels.Set(topic.topic_id, out.store.doc(static_cast<DocIndex>(d)).external_id,
                    is_rel ? 1 : 0);
    }
  }
  return out;
}

CorpusBundle MakeSyntheticBundle(const SyntheticSpec &spec) {
  SyntheticCorpus c = MakeSyntheticCorpus(spec);
  return MakeBundle(std::move(c.store), std::move(c.annotations), std::move(c.qrels),
                    std::move(c.topics));
}

void WriteSyntheticFiles(const SyntheticCorpus &corpus, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  std::ofstream docs(dir / "corpus.jsonl");
  for (const Document &d : corpus.store.docs()) {
    docs << nlohmann::json{{"external_id", d.external_id}, {"title", d.title}, {"body", d.body}}
                .dump()
         << "\n";
  }
  std::ofstream ann(dir / "annotations.jsonl");
  for (const AnnotationRecord &a : corpus.annotations) {
    ann << nlohmann::json{{"external_id", a.external_id}, {"entities", a.entities}}.dump()
        << "\n";
  }
  std::ofstream qrels(dir / "qrels.txt");
  for (const auto &[topic, judged] : corpus.qrels.judgments()) {
    for (const auto &[id, label] : judged) qrels << topic << " 0 " << id << " " << label << "\n";
  }
  std::ofstream topics(dir / "topics.jsonl");
  for (const Topic &t : corpus.topics) {
    topics << nlohmann::json{{"topic_id", t.topic_id}, {"title", t.title_text}}.dump() << "\n";
  }
}

std::filesystem::path TempDir(const std::string &prefix) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             (prefix + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sbstar::testing
