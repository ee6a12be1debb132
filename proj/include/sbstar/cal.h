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

#ifndef SBSTAR_CAL_H_
#define SBSTAR_CAL_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbstar/corpus.h"
#include "sbstar/features.h"

namespace sbstar {

struct LrHyperparameters {
  double l2_lambda = 1e-4;
  // Step size at epoch t is learning_rate / sqrt(t).
  double learning_rate = 0.1;
  int max_epochs = 200;
  // Training stops once the full-objective gradient norm drops below this.
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
};

struct LabeledExample {
  SparseVector features;
  int label = 0;  // 0 or 1
};

// L2-regularized logistic regression over unit-normalized sparse inputs:
//   p(x) = sigmoid(w . x / |x| + b).
// The bias is not regularized.
struct LrModel {
  std::vector<double> weights;
  double bias = 0.0;
  LrHyperparameters hyper;
  int epochs_run = 0;

  double Margin(const SparseVector &x) const;
  double Probability(const SparseVector &x) const;
};

double Sigmoid(double z);

// Mean logistic loss plus (l2_lambda / 2) |w|^2.
double Objective(const LrModel &model, std::span<const LabeledExample> examples);

// Stochastic gradient descent with a per-epoch shuffle drawn from
// hyper.seed. Throws InvalidArgument unless both classes are present.
LrModel TrainModel(std::size_t vocabulary_size,
                   std::span<const LabeledExample> examples,
                   const LrHyperparameters &hyper);

// Probability per requested doc, in the order given.
std::vector<double> Score(const LrModel &model, const FeatureMatrix &features,
                          std::span<const DocIndex> docs);

// Probability for every document of the matrix, indexed by doc.
std::vector<double> ScoreAll(const LrModel &model, const FeatureMatrix &features);

// Top `batch_size` unreviewed documents by descending probability, ties by
// ascending doc index.
std::vector<DocIndex> NextBatch(std::span<const double> probs,
                                const std::vector<bool> &reviewed,
                                std::size_t batch_size);

// Number of pseudo-negatives drawn for a collection of n documents:
// min(limit, n / 10), at least 1 when n > 0.
std::size_t PseudoNegativeCount(std::size_t n, std::size_t limit = 100);

struct SeedSet {
  // Synthetic relevant document built from the topic title.
  SparseVector positive;
  // Random documents presumed non-relevant.
  std::vector<DocIndex> pseudo_negatives;
};

SeedSet SeedTraining(const Topic &topic, const DocumentStore &store,
                     const FeatureMatrix &features, std::mt19937_64 &rng,
                     std::size_t negative_limit = 100);

struct CalConfig {
  LrHyperparameters lr;
  // Batch schedule: B <- B + ceil(B / batch_growth), starting at B = 1.
  int batch_growth = 10;
  std::size_t pseudo_negatives = 100;
  std::uint64_t seed = 1;
};

// Batch sizes 1, 2, 3, ..., 10, 11, 13, ...
std::size_t NextBatchSize(std::size_t current, int growth);

struct ReviewedDoc {
  DocIndex doc = 0;
  int label = 0;
  int round = 0;
};

struct CalState {
  std::string topic_id;
  double stop_ratio = 1.0;
  std::size_t num_docs = 0;
  std::vector<ReviewedDoc> reviewed;  // review order
  // Model retrained on all reviewed labels at the stopping point.
  std::vector<double> relevance_probs;
  std::size_t batch_size = 1;  // schedule position at the stop

  std::vector<DocIndex> ReviewOrder() const;
  std::vector<bool> ReviewedMask() const;
  // Unreviewed documents, ascending.
  std::vector<DocIndex> Unreviewed() const;
};

// ceil(stop_ratio * n), with stop_ratio in (0, 1].
std::size_t ReviewTarget(double stop_ratio, std::size_t n);

// Continuous active learning with qrels as the labeling oracle, reviewing
// until ceil(stop_ratio * N) documents are labeled.
CalState RunCal(const DocumentStore &store, const FeatureMatrix &features,
                const Topic &topic, const Qrels &qrels, double stop_ratio,
                const CalConfig &config);

// One CAL run that snapshots the state at every requested stop ratio. Each
// snapshot is identical to a standalone RunCal at that ratio. Results are
// ordered by ascending stop ratio.
std::vector<CalState> RunCalSnapshots(const DocumentStore &store,
                                      const FeatureMatrix &features,
                                      const Topic &topic, const Qrels &qrels,
                                      std::vector<double> stop_ratios,
                                      const CalConfig &config);

nlohmann::json CalStateToJson(const CalState &state, const DocumentStore &store);
CalState CalStateFromJson(const nlohmann::json &j, const DocumentStore &store);
void SaveCalState(const CalState &state, const DocumentStore &store,
                  const std::filesystem::path &path);
CalState LoadCalState(const std::filesystem::path &path,
                      const DocumentStore &store);

}  // namespace sbstar

#endif  // SBSTAR_CAL_H_
