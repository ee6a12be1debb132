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

#ifndef SBSTAR_SBSTAR_H_
#define SBSTAR_SBSTAR_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbstar/corpus.h"
#include "sbstar/incidence.h"

namespace sbstar {

enum class Answer { kYes, kNo, kNotSure };

// "yes", "no", "not_sure".
std::string_view AnswerName(Answer answer);
// Accepts the names above; throws InvalidArgument otherwise.
Answer ParseAnswer(std::string_view name);

// "Are the documents you are interested in about <label>?"
std::string QuestionText(std::string_view entity_label);

// Dirichlet belief over which candidate documents the reviewer is after.
// The posterior after answers Z_0..Z_{l-1} is Dir(alpha + sum_j Z_j); counts
// hold sum_j Z_j per candidate.
class Belief {
 public:
  Belief() = default;
  // `candidates` must be strictly ascending; alpha aligns with it.
  Belief(std::vector<DocIndex> candidates, std::vector<double> alpha);

  std::size_t size() const { return candidates_.size(); }
  const std::vector<DocIndex> &candidates() const { return candidates_; }
  const std::vector<double> &alpha() const { return alpha_; }
  const std::vector<std::uint32_t> &counts() const { return counts_; }
  // Number of Yes/No answers applied.
  std::uint32_t answered() const { return answered_; }

  // Position of doc within candidates, or nullopt.
  std::optional<std::size_t> Position(DocIndex doc) const;

  // alpha(d) + counts(d) for candidate position i.
  double Mass(std::size_t i) const { return alpha_[i] + counts_[i]; }

  // Adds one to counts(d) for every candidate where agrees[i] is true.
  void AddAgreement(const std::vector<bool> &agrees);

 private:
  std::vector<DocIndex> candidates_;
  std::vector<double> alpha_;
  std::vector<std::uint32_t> counts_;
  std::uint32_t answered_ = 0;
};

// alpha(d) = kappa * max(p(d), alpha_floor) over the candidates, with
// relevance_probs indexed by doc. Throws InvalidArgument on an empty
// candidate set or missing probabilities.
Belief InitBelief(std::span<const double> relevance_probs,
                  std::vector<DocIndex> candidates, double alpha_floor = 1e-6,
                  double kappa = 1.0);

// Certainty-equivalent preference: pi(d) = (alpha(d) + counts(d)) /
// sum_d' (alpha(d') + counts(d')), aligned with belief.candidates().
std::vector<double> Preference(const Belief &belief);

// Shannon entropy (nats) of the preference vector.
double PreferenceEntropy(const Belief &belief);

// The remaining entity questions with their presence restricted to a
// belief's candidate documents. Entities leave the pool once asked.
class QuestionPool {
 public:
  QuestionPool() = default;
  QuestionPool(const EntityIncidenceMatrix &matrix,
               std::span<const DocIndex> candidates,
               std::vector<EntityId> entities);

  bool empty() const { return entities_.empty(); }
  std::size_t size() const { return entities_.size(); }
  const std::vector<EntityId> &entities() const { return entities_; }
  bool Contains(EntityId e) const;

  const std::string &label(EntityId e) const { return matrix_->label(e); }
  // Presence over candidate positions.
  const Bitset &Restricted(EntityId e) const;
  std::size_t RestrictedDf(EntityId e) const;

  // Throws InvalidArgument if e is not in the pool.
  void Remove(EntityId e);

  const EntityIncidenceMatrix &matrix() const { return *matrix_; }

 private:
  const EntityIncidenceMatrix *matrix_ = nullptr;
  std::vector<EntityId> entities_;
  // Indexed by entity id; populated for the initial pool.
  std::vector<Bitset> restricted_;
  std::vector<std::size_t> restricted_df_;
  std::vector<bool> in_pool_;
};

// |sum_d (2 * 1{e(d) = 1} - 1) * pi(d)| over the pool's candidates.
double BalanceScore(const Belief &belief, const QuestionPool &pool, EntityId e);

// Generalized binary search: the pool entity with minimum balance score,
// ties broken by higher restricted df then ascending label. Returns nullopt
// when the pool is exhausted.
std::optional<EntityId> SelectQuestion(const Belief &belief,
                                       const QuestionPool &pool);

// Bayes update for one answered question. Yes increments counts where the
// entity is present, No where it is absent, NotSure leaves the belief
// unchanged. The entity leaves the pool in every case.
void ApplyAnswer(Belief &belief, QuestionPool &pool, EntityId e, Answer answer);

// Candidates by descending pi, then descending lr_probs (indexed by doc),
// then ascending doc index.
std::vector<DocIndex> FinalRanking(const Belief &belief,
                                   std::span<const double> lr_probs);

struct Question {
  EntityId entity = 0;
  std::string label;
  std::string text;
};

struct QuestionRecord {
  EntityId entity = 0;
  std::string label;
  Answer answer = Answer::kNotSure;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  // Rank of the last target document after the update, when targets are
  // known.
  std::optional<std::size_t> last_rel_after;
};

// Yields one answer per question, in question order.
class AnswerSource {
 public:
  virtual ~AnswerSource() = default;
  virtual Answer Ask(const Question &question) = 0;
};

enum class Selector { kGbs, kRandom };

// One SBSTAR question phase. Single-owner mutable state: NextQuestion and
// Submit must alternate.
class Session {
 public:
  Session(Belief belief, QuestionPool pool, std::size_t budget,
          std::vector<double> lr_probs, Selector selector = Selector::kGbs,
          std::uint64_t seed = 0);

  // Relevant targets used for the last_rel trace. Optional.
  void TrackTargets(std::vector<DocIndex> targets);

  // Selects (or returns the already pending) question. Returns nullopt once
  // the budget is spent or the pool is exhausted.
  std::optional<Question> NextQuestion();
  const std::optional<Question> &pending() const { return pending_; }

  // Applies the answer to the pending question. Throws InvalidArgument when
  // no question is pending.
  const QuestionRecord &Submit(Answer answer);

  bool finished() const;
  bool pool_exhausted() const { return pool_.empty() && asked_ < budget_; }
  std::size_t budget() const { return budget_; }
  std::size_t asked() const { return asked_; }
  std::size_t questions_remaining() const { return budget_ - asked_; }

  const Belief &belief() const { return belief_; }
  const QuestionPool &pool() const { return pool_; }
  const std::vector<double> &lr_probs() const { return lr_probs_; }
  const std::vector<QuestionRecord> &transcript() const { return transcript_; }
  std::vector<DocIndex> Ranking() const;

 private:
  Belief belief_;
  QuestionPool pool_;
  std::size_t budget_;
  std::size_t asked_ = 0;
  std::vector<double> lr_probs_;
  Selector selector_;
  std::mt19937_64 rng_;
  std::optional<Question> pending_;
  std::vector<QuestionRecord> transcript_;
  std::vector<DocIndex> targets_;
};

struct SessionResult {
  std::vector<DocIndex> ranking;
  std::vector<QuestionRecord> transcript;
  bool pool_exhausted = false;
};

// Drives a session to completion against `source`.
SessionResult RunSession(Session &session, AnswerSource &source);

// Convenience: GBS session over `pool` for at most n_questions questions.
SessionResult RunSession(const Belief &belief, const QuestionPool &pool,
                         AnswerSource &source, std::size_t n_questions,
                         std::span<const double> lr_probs,
                         std::vector<DocIndex> targets = {});

// Same loop with questions drawn uniformly at random from the pool.
SessionResult RunRandomSession(const Belief &belief, const QuestionPool &pool,
                               AnswerSource &source, std::size_t n_questions,
                               std::span<const double> lr_probs,
                               std::uint64_t seed,
                               std::vector<DocIndex> targets = {});

}  // namespace sbstar

#endif  // SBSTAR_SBSTAR_H_
