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

#include "sbstar/cal.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sbstar/error.h"

namespace sbstar {

using json = nlohmann::json;

namespace {

std::uint64_t Mix(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double InverseNorm(const SparseVector &x) {
  double n2 = SquaredNorm(x);
  return n2 > 0.0 ? 1.0 / std::sqrt(n2) : 0.0;
}

// log(1 + exp(-y * z)) with y in {-1, +1}, stable for large |z|.
double LogisticLoss(double z, int label) {
  double m = label == 1 ? z : -z;
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

std::vector<DocIndex> SampleFrom(const std::vector<DocIndex> &pool,
                                 std::size_t count, std::mt19937_64 &rng) {
  std::vector<DocIndex> out;
  out.reserve(std::min(count, pool.size()));
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), count, rng);
  return out;
}

}  // namespace

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double LrModel::Margin(const SparseVector &x) const {
  return Dot(weights, x) * InverseNorm(x) + bias;
}

double LrModel::Probability(const SparseVector &x) const {
  return Sigmoid(Margin(x));
}

double Objective(const LrModel &model,
                 std::span<const LabeledExample> examples) {
  if (examples.empty()) return 0.0;
  double loss = 0.0;
  for (const auto &ex : examples) loss += LogisticLoss(model.Margin(ex.features), ex.label);
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  return loss / static_cast<double>(examples.size()) +
         0.5 * model.hyper.l2_lambda * reg;
}

LrModel TrainModel(std::size_t vocabulary_size,
                   std::span<const LabeledExample> examples,
                   const LrHyperparameters &hyper) {
  std::size_t positives = 0;
  for (const auto &ex : examples) {
    if (ex.label != 0 && ex.label != 1) {
      throw InvalidArgument("training labels must be 0 or 1");
    }
    positives += ex.label;
  }
  if (positives == 0 || positives == examples.size()) {
    throw InvalidArgument(
        "training requires at least one positive and one negative example");
  }
  for (const auto &ex : examples) {
    for (const auto &entry : ex.features) {
      if (entry.term >= vocabulary_size) {
        throw InvalidArgument("feature index outside vocabulary");
      }
    }
  }

  const std::size_t n = examples.size();
  std::vector<double> inv_norm(n);
  for (std::size_t i = 0; i < n; ++i) inv_norm[i] = InverseNorm(examples[i].features);

  // Weights are stored as scale * v so the L2 shrink is O(1) per step.
  std::vector<double> v(vocabulary_size, 0.0);
  double scale = 1.0;
  double bias = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(hyper.seed);
  std::vector<double> grad(vocabulary_size);

  LrModel model;
  model.hyper = hyper;
  int epoch = 0;
  while (epoch < hyper.max_epochs) {
    ++epoch;
    const double eta = hyper.learning_rate / std::sqrt(static_cast<double>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const auto &ex = examples[i];
      double z = scale * Dot(v, ex.features) * inv_norm[i] + bias;
      double g = Sigmoid(z) - ex.label;
      scale *= 1.0 - eta * hyper.l2_lambda;
      if (scale < 1e-9) {
        for (double &w : v) w *= scale;
        scale = 1.0;
      }
      const double step = eta * g * inv_norm[i] / scale;
      for (const auto &entry : ex.features) v[entry.term] -= step * entry.weight;
      bias -= eta * g;
    }

    // Full gradient of the objective at the current iterate.
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto &ex = examples[i];
      double z = scale * Dot(v, ex.features) * inv_norm[i] + bias;
      double g = (Sigmoid(z) - ex.label) / static_cast<double>(n);
      for (const auto &entry : ex.features) grad[entry.term] += g * entry.weight * inv_norm[i];
      grad_b += g;
    }
    double norm2 = grad_b * grad_b;
    for (std::size_t t = 0; t < vocabulary_size; ++t) {
      double gt = grad[t] + hyper.l2_lambda * scale * v[t];
      norm2 += gt * gt;
    }
    if (std::sqrt(norm2) < hyper.tolerance) break;
  }

  for (double &w : v) w *= scale;
  model.weights = std::move(v);
  model.bias = bias;
  model.epochs_run = epoch;
  return model;
}

std::vector<double> Score(const LrModel &model, const FeatureMatrix &features,
                          std::span<const DocIndex> docs) {
  std::vector<double> probs;
  probs.reserve(docs.size());
  for (DocIndex d : docs) probs.push_back(model.Probability(features.row(d)));
  return probs;
}

std::vector<double> ScoreAll(const LrModel &model,
                             const FeatureMatrix &features) {
  std::vector<double> probs;
  probs.reserve(features.num_docs());
  for (const auto &row : features.rows()) probs.push_back(model.Probability(row));
  return probs;
}

std::vector<DocIndex> NextBatch(std::span<const double> probs,
                                const std::vector<bool> &reviewed,
                                std::size_t batch_size) {
  if (batch_size == 0) throw InvalidArgument("batch_size must be at least 1");
  std::vector<DocIndex> pool;
  for (DocIndex d = 0; d < probs.size(); ++d) {
    if (d >= reviewed.size() || !reviewed[d]) pool.push_back(d);
  }
  const std::size_t k = std::min(batch_size, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k),
                    pool.end(), [&](DocIndex a, DocIndex b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      return a < b;
                    });
  pool.resize(k);
  return pool;
}

std::size_t PseudoNegativeCount(std::size_t n, std::size_t limit) {
  if (n == 0) return 0;
  return std::max<std::size_t>(1, std::min(limit, n / 10));
}

SeedSet SeedTraining(const Topic &topic, const DocumentStore &store,
                     const FeatureMatrix &features, std::mt19937_64 &rng,
                     std::size_t negative_limit) {
  if (topic.title_text.empty()) throw InvalidArgument("topic title is empty");
  if (store.empty()) throw InvalidArgument("cannot seed on an empty store");
  std::vector<DocIndex> all(store.size());
  std::iota(all.begin(), all.end(), 0);
  SeedSet seed;
  seed.positive = features.Vectorize(topic.title_text);
  seed.pseudo_negatives =
      SampleFrom(all, PseudoNegativeCount(store.size(), negative_limit), rng);
  return seed;
}

std::size_t NextBatchSize(std::size_t current, int growth) {
  if (growth <= 0) throw InvalidArgument("batch_growth must be positive");
  const auto g = static_cast<std::size_t>(growth);
  return current + (current + g - 1) / g;
}

std::vector<DocIndex> CalState::ReviewOrder() const {
  std::vector<DocIndex> order;
  order.reserve(reviewed.size());
  for (const auto &r : reviewed) order.push_back(r.doc);
  return order;
}

std::vector<bool> CalState::ReviewedMask() const {
  std::vector<bool> mask(num_docs, false);
  for (const auto &r : reviewed) mask[r.doc] = true;
  return mask;
}

std::vector<DocIndex> CalState::Unreviewed() const {
  auto mask = ReviewedMask();
  std::vector<DocIndex> out;
  for (DocIndex d = 0; d < num_docs; ++d) {
    if (!mask[d]) out.push_back(d);
  }
  return out;
}

std::size_t ReviewTarget(double stop_ratio, std::size_t n) {
  if (!(stop_ratio > 0.0 && stop_ratio <= 1.0)) {
    throw InvalidArgument("stop_ratio must lie in (0, 1]");
  }
  // The epsilon absorbs representation error such as 0.55 * 100.
  auto target = static_cast<std::size_t>(
      std::ceil(stop_ratio * static_cast<double>(n) - 1e-9));
  return std::min(target, n);
}

namespace {

// Mutable loop state shared by the snapshot driver.
class CalLoop {
 public:
  CalLoop(const DocumentStore &store, const FeatureMatrix &features,
          const Topic &topic, const Qrels &qrels, const CalConfig &config)
      : store_(store),
        features_(features),
        topic_(topic),
        qrels_(qrels),
        config_(config),
        mask_(store.size(), false) {
    if (topic.title_text.empty()) throw InvalidArgument("topic title is empty");
    if (store.empty()) throw InvalidArgument("cannot run CAL on an empty store");
    if (!qrels.HasTopic(topic.topic_id)) {
      throw InvalidArgument("topic " + topic.topic_id + " is missing from qrels");
    }
    positive_ = features.Vectorize(topic.title_text);
  }

  // Trains on the current labels plus fresh pseudo-negatives. Returns false
  // when only one class is available.
  bool Train(std::uint64_t salt, LrModel *model) const {
    std::vector<LabeledExample> examples;
    examples.reserve(reviewed_.size() + config_.pseudo_negatives + 1);
    examples.push_back({positive_, 1});
    for (const auto &r : reviewed_) examples.push_back({features_.row(r.doc), r.label});

    std::vector<DocIndex> unreviewed;
    for (DocIndex d = 0; d < store_.size(); ++d) {
      if (!mask_[d]) unreviewed.push_back(d);
    }
    std::mt19937_64 rng(Mix(config_.seed, salt));
    for (DocIndex d : SampleFrom(unreviewed,
                                 PseudoNegativeCount(store_.size(),
                                                     config_.pseudo_negatives),
                                 rng)) {
      examples.push_back({features_.row(d), 0});
    }
    bool has_negative = std::any_of(examples.begin(), examples.end(),
                                    [](const auto &ex) { return ex.label == 0; });
    if (!has_negative) return false;

    LrHyperparameters hyper = config_.lr;
    hyper.seed = Mix(config_.lr.seed, salt);
    *model = TrainModel(features_.vocabulary_size(), examples, hyper);
    return true;
  }

  std::vector<CalState> Run(const std::vector<double> &stop_ratios) {
    std::vector<std::size_t> targets;
    for (double r : stop_ratios) targets.push_back(ReviewTarget(r, store_.size()));
    const std::size_t final_target = targets.back();

    std::vector<CalState> snapshots;
    std::size_t next = 0;
    std::size_t batch = 1;
    std::vector<double> probs(store_.size(), 0.5);
    int round = 0;
    auto take_snapshots = [&] {
      while (next < targets.size() && reviewed_.size() == targets[next]) {
        snapshots.push_back(Snapshot(stop_ratios[next], round, batch, probs));
        ++next;
      }
    };
    take_snapshots();
    while (next < targets.size()) {
      LrModel model;
      if (Train(2 * static_cast<std::uint64_t>(round), &model)) {
        probs = ScoreAll(model, features_);
      }
      std::size_t size = std::min(batch, final_target - reviewed_.size());
      for (DocIndex d : NextBatch(probs, mask_, size)) {
        Review(d, round);
        take_snapshots();
      }
      batch = NextBatchSize(batch, config_.batch_growth);
      ++round;
    }
    return snapshots;
  }

 private:
  void Review(DocIndex d, int round) {
    int label = qrels_.IsRelevant(topic_.topic_id, store_.doc(d).external_id) ? 1 : 0;
    reviewed_.push_back({d, label, round});
    mask_[d] = true;
  }

  CalState Snapshot(double stop_ratio, int round, std::size_t batch,
                    const std::vector<double> &last_probs) const {
    CalState state;
    state.topic_id = topic_.topic_id;
    state.stop_ratio = stop_ratio;
    state.num_docs = store_.size();
    state.reviewed = reviewed_;
    state.batch_size = batch;
    LrModel model;
    if (Train(2 * static_cast<std::uint64_t>(round) + 1, &model)) {
      state.relevance_probs = ScoreAll(model, features_);
    } else {
      state.relevance_probs = last_probs;
    }
    return state;
  }

  const DocumentStore &store_;
  const FeatureMatrix &features_;
  const Topic &topic_;
  const Qrels &qrels_;
  const CalConfig &config_;
  SparseVector positive_;
  std::vector<ReviewedDoc> reviewed_;
  std::vector<bool> mask_;
};

}  // namespace

std::vector<CalState> RunCalSnapshots(const DocumentStore &store,
                                      const FeatureMatrix &features,
                                      const Topic &topic, const Qrels &qrels,
                                      std::vector<double> stop_ratios,
                                      const CalConfig &config) {
  if (stop_ratios.empty()) throw InvalidArgument("no stop ratios given");
  for (double r : stop_ratios) ReviewTarget(r, 1);
  std::sort(stop_ratios.begin(), stop_ratios.end());
  CalLoop loop(store, features, topic, qrels, config);
  return loop.Run(stop_ratios);
}

CalState RunCal(const DocumentStore &store, const FeatureMatrix &features,
                const Topic &topic, const Qrels &qrels, double stop_ratio,
                const CalConfig &config) {
  return RunCalSnapshots(store, features, topic, qrels, {stop_ratio}, config)
      .front();
}

json CalStateToJson(const CalState &state, const DocumentStore &store) {
  json reviewed = json::array();
  for (const auto &r : state.reviewed) {
    reviewed.push_back({{"doc", r.doc},
                        {"external_id", store.doc(r.doc).external_id},
                        {"label", r.label},
                        {"round", r.round}});
  }
  return {{"topic_id", state.topic_id},
          {"stop_ratio", state.stop_ratio},
          {"num_docs", state.num_docs},
          {"batch_size", state.batch_size},
          {"reviewed", std::move(reviewed)},
          {"relevance_probs", state.relevance_probs}};
}

CalState CalStateFromJson(const json &j, const DocumentStore &store) {
  CalState state;
  try {
    state.topic_id = j.at("topic_id").get<std::string>();
    state.stop_ratio = j.at("stop_ratio").get<double>();
    state.num_docs = j.at("num_docs").get<std::size_t>();
    state.batch_size = j.value("batch_size", std::size_t{1});
    state.relevance_probs = j.at("relevance_probs").get<std::vector<double>>();
    for (const auto &r : j.at("reviewed")) {
      ReviewedDoc doc;
      doc.label = r.at("label").get<int>();
      doc.round = r.value("round", 0);
      auto index = store.Find(r.at("external_id").get<std::string>());
      if (!index) throw FormatError("checkpoint references an unknown document");
      doc.doc = *index;
      state.reviewed.push_back(doc);
    }
  } catch (const json::exception &e) {
    throw FormatError(std::string("malformed CAL checkpoint: ") + e.what());
  }
  if (state.num_docs != store.size() ||
      state.relevance_probs.size() != store.size()) {
    throw FormatError("CAL checkpoint does not match the document store");
  }
  return state;
}

void SaveCalState(const CalState &state, const DocumentStore &store,
                  const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << CalStateToJson(state, store).dump() << '\n';
}

CalState LoadCalState(const std::filesystem::path &path,
                      const DocumentStore &store) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::parse_error &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return CalStateFromJson(j, store);
}

}  // namespace sbstar
