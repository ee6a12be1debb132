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

#include "sbstar/metrics.h"

#include <unordered_set>

#include "sbstar/error.h"

namespace sbstar {

std::optional<double> AveragePrecision(std::span<const DocIndex> ranking,
                                       std::span<const DocIndex> relevant) {
  std::unordered_set<DocIndex> targets(relevant.begin(), relevant.end());
  if (targets.empty()) return std::nullopt;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (targets.count(ranking[r]) == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(targets.size());
}

std::size_t LastRel(std::span<const DocIndex> ranking,
                    std::span<const DocIndex> relevant) {
  std::unordered_set<DocIndex> targets(relevant.begin(), relevant.end());
  if (targets.empty()) throw InvalidArgument("last_rel needs relevant documents");
  std::size_t found = 0;
  std::size_t last = 0;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (targets.count(ranking[r]) == 0) continue;
    ++found;
    last = r + 1;
  }
  if (found != targets.size()) {
    throw InvalidArgument("relevant document missing from ranking");
  }
  return last;
}

std::size_t TotalEffort(std::size_t cal_reviewed, std::size_t n_questions,
                        std::size_t last_rel_post, std::size_t cal_last_rel) {
  if (last_rel_post == 0) return cal_last_rel + n_questions;
  return cal_reviewed + last_rel_post + n_questions;
}

}  // namespace sbstar
