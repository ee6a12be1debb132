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

#ifndef SBSTAR_REVIEWER_H_
#define SBSTAR_REVIEWER_H_

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <vector>

#include "sbstar/cal.h"
#include "sbstar/corpus.h"
#include "sbstar/error.h"
#include "sbstar/incidence.h"
#include "sbstar/sbstar.h"

namespace sbstar {

// Relevant documents left unreviewed when CAL stopped: the targets of the
// question phase.
struct MissingSet {
  std::vector<DocIndex> docs;  // ascending
  // False when the topic has no relevant documents at all; such runs are
  // flagged by the evaluation harness.
  bool topic_has_relevant = false;

  bool empty() const { return docs.empty(); }
};

MissingSet ComputeMissing(const Qrels &qrels, const std::string &topic_id,
                          const DocumentStore &store, const CalState &state);

// Full-knowledge reviewer: Yes iff the entity occurs in every missing
// document, No iff it occurs in none, NotSure otherwise. Throws
// InvalidArgument for an empty missing set.
Answer OracleAnswer(EntityId entity, const MissingSet &missing,
                    const EntityIncidenceMatrix &matrix);

class OracleReviewer : public AnswerSource {
 public:
  // Both references must outlive the reviewer.
  OracleReviewer(const EntityIncidenceMatrix &matrix, const MissingSet &missing);
  Answer Ask(const Question &question) override;

 private:
  const EntityIncidenceMatrix &matrix_;
  const MissingSet &missing_;
};

// Replays a fixed answer sequence; throws InvalidArgument when exhausted.
class ScriptedReviewer : public AnswerSource {
 public:
  explicit ScriptedReviewer(std::vector<Answer> answers)
      : answers_(std::move(answers)) {}
  Answer Ask(const Question &question) override;
  std::size_t consumed() const { return next_; }

 private:
  std::vector<Answer> answers_;
  std::size_t next_ = 0;
};

class SessionStalled : public Error {
 public:
  using Error::Error;
};

// Hand-off point between a session thread and a human reviewer. Ask blocks
// until Post delivers the answer or the timeout elapses, in which case the
// session is marked stalled and SessionStalled is thrown. At most one
// question is outstanding.
class AnswerConduit : public AnswerSource {
 public:
  explicit AnswerConduit(std::chrono::milliseconds timeout) : timeout_(timeout) {}

  Answer Ask(const Question &question) override;

  // Delivers an answer for the outstanding question. Returns false when no
  // question is waiting or an answer is already queued.
  bool Post(Answer answer);

  std::optional<Question> Outstanding() const;
  bool stalled() const;

 private:
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<Question> outstanding_;
  std::optional<Answer> answer_;
  bool stalled_ = false;
};

}  // namespace sbstar

#endif  // SBSTAR_REVIEWER_H_
