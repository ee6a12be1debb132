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

#include "sbstar/bundle.h"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "sbstar/error.h"

namespace sbstar {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kBundleFormat = 1;

void RequireFile(const fs::path &path, const char *what) {
  if (!fs::is_regular_file(path)) {
    throw Error(std::string(what) + " file not found: " + path.string());
  }
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<std::string> ReadLexicon(const fs::path &path) {
  std::vector<std::string> lexicon;
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lexicon.push_back(line);
  }
  return lexicon;
}

std::string CorpusJsonl(const DocumentStore &store) {
  std::string out;
  for (const auto &doc : store.docs()) {
    out += json{{"external_id", doc.external_id},
                {"title", doc.title},
                {"body", doc.body}}
               .dump();
    out += '\n';
  }
  return out;
}

std::string AnnotationsJsonl(const std::vector<AnnotationRecord> &records) {
  std::string out;
  for (const auto &r : records) {
    out += json{{"external_id", r.external_id}, {"entities", r.entities}}.dump();
    out += '\n';
  }
  return out;
}

std::string QrelsText(const Qrels &qrels) {
  std::string out;
  for (const auto &[topic, labels] : qrels.judgments()) {
    for (const auto &[id, label] : labels) {
      out += topic + " 0 " + id + " " + std::to_string(label) + "\n";
    }
  }
  return out;
}

std::string TopicsJsonl(const std::vector<Topic> &topics) {
  std::string out;
  for (const auto &t : topics) {
    out += json{{"topic_id", t.topic_id}, {"title", t.title_text}}.dump();
    out += '\n';
  }
  return out;
}

json FeaturesJson(const FeatureMatrix &features) {
  json rows = json::array();
  for (const auto &row : features.rows()) {
    json r = json::array();
    for (const auto &e : row) r.push_back({e.term, e.weight});
    rows.push_back(std::move(r));
  }
  return {{"terms", features.terms()}, {"idf", features.idf()}, {"rows", rows}};
}

FeatureMatrix FeaturesFromJson(const json &j) {
  std::vector<SparseVector> rows;
  for (const auto &r : j.at("rows")) {
    SparseVector row;
    for (const auto &e : r) row.push_back({e.at(0).get<TermId>(), e.at(1).get<double>()});
    rows.push_back(std::move(row));
  }
  return FeatureMatrix(j.at("terms").get<std::vector<std::string>>(),
                       j.at("idf").get<std::vector<double>>(), std::move(rows));
}

}  // namespace

const Topic *CorpusBundle::FindTopic(const std::string &topic_id) const {
  for (const auto &t : topics) {
    if (t.topic_id == topic_id) return &t;
  }
  return nullptr;
}

CorpusBundle MakeBundle(DocumentStore store,
                        std::vector<AnnotationRecord> annotations, Qrels qrels,
                        std::vector<Topic> topics) {
  CorpusBundle bundle;
  bundle.matrix = BuildIncidence(annotations, store);
  bundle.features = BuildFeatures(store);
  bundle.store = std::move(store);
  bundle.annotations = std::move(annotations);
  bundle.qrels = std::move(qrels);
  bundle.topics = std::move(topics);
  return bundle;
}

std::string HashInputs(const IngestInputs &inputs) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 unavailable");
  }
  auto feed = [&](const std::string &tag, const std::optional<fs::path> &path) {
    std::string data = tag + "\n";
    if (path) {
      std::string bytes = ReadFile(*path);
      data += std::to_string(bytes.size()) + "\n" + bytes;
    } else {
      data += "-\n";
    }
    EVP_DigestUpdate(ctx.get(), data.data(), data.size());
  };
  feed("corpus", inputs.corpus);
  feed("annotations", inputs.annotations);
  feed("lexicon", inputs.lexicon);
  feed("qrels", inputs.qrels);
  feed("topics", inputs.topics);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

IngestResult IngestBundle(const IngestInputs &inputs, const fs::path &bundle_dir) {
  RequireFile(inputs.corpus, "corpus");
  RequireFile(inputs.qrels, "qrels");
  RequireFile(inputs.topics, "topics");
  if (inputs.annotations) RequireFile(*inputs.annotations, "annotations");
  if (inputs.lexicon) RequireFile(*inputs.lexicon, "lexicon");

  IngestResult result;
  result.bundle_dir = bundle_dir;
  result.content_hash = HashInputs(inputs);

  const fs::path manifest_path = bundle_dir / "manifest.json";
  if (fs::is_regular_file(manifest_path)) {
    try {
      json manifest = json::parse(ReadFile(manifest_path));
      if (manifest.value("content_hash", "") == result.content_hash &&
          manifest.value("format", 0) == kBundleFormat) {
        result.cache_hit = true;
        result.documents = manifest.at("documents").get<std::size_t>();
        result.entities = manifest.at("entities").get<std::size_t>();
        return result;
      }
    } catch (const json::exception &) {
      // Unreadable manifest: rebuild.
    }
  }

  DocumentStore store = LoadCorpus(inputs.corpus, &result.warnings);
  if (store.empty()) throw Error("corpus " + inputs.corpus.string() + " is empty");
  std::vector<AnnotationRecord> records;
  AnnotationReport annotation_report;
  if (inputs.annotations) {
    try {
      records = ParseAnnotations(ReadFile(*inputs.annotations));
    } catch (const FormatError &e) {
      throw FormatError(inputs.annotations->string() + ": " + e.what());
    }
  } else if (inputs.lexicon) {
    records = AnnotateDictionary(store, ReadLexicon(*inputs.lexicon));
  } else {
    result.warnings.push_back("no annotations or lexicon given; entity pool is empty");
  }
  Qrels qrels = LoadQrels(inputs.qrels);
  std::vector<Topic> topics = LoadTopics(inputs.topics);

  // Keep only resolvable annotation records in the bundle.
  std::vector<AnnotationRecord> kept;
  for (auto &r : records) {
    if (store.Find(r.external_id)) {
      kept.push_back(std::move(r));
    } else {
      annotation_report.unmatched_ids.push_back(r.external_id);
    }
  }
  QrelsReport qrels_report = ResolveQrels(qrels, store);
  for (const auto &r : annotation_report.unmatched_ids) {
    result.warnings.push_back("annotation for unknown document " + r);
  }
  if (!qrels_report.unmatched.empty()) {
    result.warnings.push_back(std::to_string(qrels_report.unmatched.size()) +
                              " judged ids do not resolve");
  }

  CorpusBundle bundle = MakeBundle(std::move(store), std::move(kept),
                                   std::move(qrels), std::move(topics));
  fs::create_directories(bundle_dir);
  WriteText(bundle_dir / "documents.jsonl", CorpusJsonl(bundle.store));
  WriteText(bundle_dir / "annotations.jsonl", AnnotationsJsonl(bundle.annotations));
  WriteText(bundle_dir / "qrels.txt", QrelsText(bundle.qrels));
  WriteText(bundle_dir / "topics.jsonl", TopicsJsonl(bundle.topics));
  WriteText(bundle_dir / "features.json", FeaturesJson(bundle.features).dump());

  json unmatched_qrels = json::array();
  for (const auto &[topic, id] : qrels_report.unmatched) {
    unmatched_qrels.push_back({{"topic_id", topic}, {"external_id", id}});
  }
  json manifest = {
      {"format", kBundleFormat},
      {"content_hash", result.content_hash},
      {"inputs",
       {{"corpus", inputs.corpus.string()},
        {"annotations", inputs.annotations ? inputs.annotations->string() : ""},
        {"lexicon", inputs.lexicon ? inputs.lexicon->string() : ""},
        {"qrels", inputs.qrels.string()},
        {"topics", inputs.topics.string()}}},
      {"documents", bundle.store.size()},
      {"entities", bundle.matrix.num_entities()},
      {"vocabulary", bundle.features.vocabulary_size()},
      {"topics", bundle.topics.size()},
      {"unmatched_annotations", annotation_report.unmatched_ids},
      {"unmatched_qrels", unmatched_qrels},
      {"warnings", result.warnings}};
  // Manifest last: its presence marks a complete bundle.
  WriteText(manifest_path, manifest.dump(2) + "\n");

  result.documents = bundle.store.size();
  result.entities = bundle.matrix.num_entities();
  return result;
}

CorpusBundle LoadBundle(const fs::path &bundle_dir) {
  RequireFile(bundle_dir / "manifest.json", "bundle manifest");
  CorpusBundle bundle;
  bundle.store = LoadCorpus(bundle_dir / "documents.jsonl");
  try {
    bundle.annotations = ParseAnnotations(ReadFile(bundle_dir / "annotations.jsonl"));
  } catch (const FormatError &e) {
    throw FormatError((bundle_dir / "annotations.jsonl").string() + ": " + e.what());
  }
  bundle.matrix = BuildIncidence(bundle.annotations, bundle.store);
  bundle.qrels = LoadQrels(bundle_dir / "qrels.txt");
  bundle.topics = LoadTopics(bundle_dir / "topics.jsonl");
  try {
    bundle.features = FeaturesFromJson(json::parse(ReadFile(bundle_dir / "features.json")));
  } catch (const json::exception &e) {
    throw FormatError("features.json: " + std::string(e.what()));
  }
  if (bundle.features.num_docs() != bundle.store.size()) {
    throw FormatError("cached features do not match the corpus");
  }
  return bundle;
}

}  // namespace sbstar
