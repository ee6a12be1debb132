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

#ifndef SBSTAR_METRICS_H_
#define SBSTAR_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>

#include "sbstar/corpus.h"

namespace sbstar {

// Mean over relevant docs of precision at the doc's rank, where relevant
// docs absent from the ranking contribute 0. nullopt when `relevant` is
// empty (AP undefined).
std::optional<double> AveragePrecision(std::span<const DocIndex> ranking,
                                       std::span<const DocIndex> relevant);

// 1-based rank of the deepest relevant document. Throws InvalidArgument if
// `relevant` is empty or any relevant doc is missing from the ranking.
std::size_t LastRel(std::span<const DocIndex> ranking,
                    std::span<const DocIndex> relevant);

// Documents reviewed plus questions answered, one answer costing one
// review: cal_reviewed + last_rel_post + n_questions. When nothing was left
// to find after CAL (last_rel_post == 0) the effort is the CAL review
// position of the last relevant document plus n_questions.
std::size_t TotalEffort(std::size_t cal_reviewed, std::size_t n_questions,
                        std::size_t last_rel_post, std::size_t cal_last_rel = 0);

}  // namespace sbstar

#endif  // SBSTAR_METRICS_H_
