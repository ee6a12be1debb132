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

#include "sbstar/sbstar.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbstar/error.h"

namespace sbstar {

std::string_view AnswerName(Answer answer) {
  switch (answer) {
    case Answer::kYes:
      return "yes";
    case Answer::kNo:
      return "no";
    case Answer::kNotSure:
      return "not_sure";
  }
  return "not_sure";
}

Answer ParseAnswer(std::string_view name) {
  if (name == "yes") return Answer::kYes;
  if (name == "no") return Answer::kNo;
  if (name == "not_sure") return Answer::kNotSure;
  throw InvalidArgument("unknown answer \"" + std::string(name) +
                        "\" (expected yes, no or not_sure)");
}

std::string QuestionText(std::string_view entity_label) {
  std::string text = "Are the documents you are interested in about ";
  text += entity_label;
  text += '?';
  return text;
}

Belief::Belief(std::vector<DocIndex> candidates, std::vector<double> alpha)
    : candidates_(std::move(candidates)),
      alpha_(std::move(alpha)),
      counts_(candidates_.size(), 0) {
  if (candidates_.empty()) throw InvalidArgument("empty candidate set");
  if (alpha_.size() != candidates_.size()) {
    throw InvalidArgument("alpha does not align with candidates");
  }
  for (std::size_t i = 1; i < candidates_.size(); ++i) {
    if (candidates_[i - 1] >= candidates_[i]) {
      throw InvalidArgument("candidates must be strictly ascending");
    }
  }
  double total = 0.0;
  for (double a : alpha_) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw InvalidArgument("alpha must be finite and nonnegative");
    }
    total += a;
  }
  if (!(total > 0.0)) throw InvalidArgument("alpha has no mass");
}

std::optional<std::size_t> Belief::Position(DocIndex doc) const {
  auto it = std::lower_bound(candidates_.begin(), candidates_.end(), doc);
  if (it == candidates_.end() || *it != doc) return std::nullopt;
  return static_cast<std::size_t>(it - candidates_.begin());
}

void Belief::AddAgreement(const std::vector<bool> &agrees) {
  if (agrees.size() != counts_.size()) {
    throw InvalidArgument("agreement vector does not align with candidates");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += agrees[i] ? 1 : 0;
  ++answered_;
}

Belief InitBelief(std::span<const double> relevance_probs,
                  std::vector<DocIndex> candidates, double alpha_floor,
                  double kappa) {
  if (candidates.empty()) throw InvalidArgument("empty candidate set");
  if (!(alpha_floor > 0.0)) throw InvalidArgument("alpha_floor must be positive");
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  std::vector<double> alpha;
  alpha.reserve(candidates.size());
  for (DocIndex d : candidates) {
    if (d >= relevance_probs.size()) {
      throw InvalidArgument("no relevance probability for candidate " +
                            std::to_string(d));
    }
    alpha.push_back(kappa * std::max(relevance_probs[d], alpha_floor));
  }
  return Belief(std::move(candidates), std::move(alpha));
}

std::vector<double> Preference(const Belief &belief) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < belief.size(); ++i) total += belief.Mass(i);
  std::vector<double> pi(belief.size());
  for (std::size_t i = 0; i < belief.size(); ++i) {
    pi[i] = static_cast<double>(belief.Mass(i) / total);
  }
  return pi;
}

double PreferenceEntropy(const Belief &belief) {
  double h = 0.0;
  for (double p : Preference(belief)) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

QuestionPool::QuestionPool(const EntityIncidenceMatrix &matrix,
                           std::span<const DocIndex> candidates,
                           std::vector<EntityId> entities)
    : matrix_(&matrix),
      restricted_(matrix.num_entities()),
      restricted_df_(matrix.num_entities(), 0),
      in_pool_(matrix.num_entities(), false) {
  for (EntityId e : entities) {
    if (e >= matrix.num_entities()) throw InvalidArgument("unknown entity id");
    if (in_pool_[e]) continue;
    in_pool_[e] = true;
    entities_.push_back(e);
    Bitset bits(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (matrix.Present(e, candidates[i])) bits.Set(i);
    }
    restricted_df_[e] = bits.Count();
    restricted_[e] = std::move(bits);
  }
}

bool QuestionPool::Contains(EntityId e) const {
  return e < in_pool_.size() && in_pool_[e];
}

const Bitset &QuestionPool::Restricted(EntityId e) const {
  if (e >= restricted_.size()) throw InvalidArgument("unknown entity id");
  return restricted_[e];
}

std::size_t QuestionPool::RestrictedDf(EntityId e) const {
  if (e >= restricted_df_.size()) throw InvalidArgument("unknown entity id");
  return restricted_df_[e];
}

void QuestionPool::Remove(EntityId e) {
  if (!Contains(e)) {
    throw InvalidArgument("entity is not in the question pool");
  }
  in_pool_[e] = false;
  entities_.erase(std::find(entities_.begin(), entities_.end(), e));
}

namespace {

long double TotalMass(const Belief &belief) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < belief.size(); ++i) total += belief.Mass(i);
  return total;
}

// |2 * mass(present) - total|, proportional to the balance score.
long double UnnormalizedBalance(const Belief &belief, const Bitset &present,
                                long double total) {
  long double inside = 0.0L;
  present.ForEach([&](std::size_t i) { inside += belief.Mass(i); });
  return std::fabs(2.0L * inside - total);
}

void CheckAligned(const Belief &belief, const QuestionPool &pool, EntityId e) {
  if (pool.Restricted(e).size() != belief.size()) {
    throw InvalidArgument("question pool was built for other candidates");
  }
}

}  // namespace

double BalanceScore(const Belief &belief, const QuestionPool &pool, EntityId e) {
  CheckAligned(belief, pool, e);
  long double total = TotalMass(belief);
  return static_cast<double>(UnnormalizedBalance(belief, pool.Restricted(e), total) /
                             total);
}

std::optional<EntityId> SelectQuestion(const Belief &belief,
                                       const QuestionPool &pool) {
  if (pool.empty()) return std::nullopt;
  const long double total = TotalMass(belief);
  std::optional<EntityId> best;
  long double best_balance = 0.0L;
  for (EntityId e : pool.entities()) {
    CheckAligned(belief, pool, e);
    long double balance = UnnormalizedBalance(belief, pool.Restricted(e), total);
    bool better = false;
    if (!best) {
      better = true;
    } else if (balance != best_balance) {
      better = balance < best_balance;
    } else if (pool.RestrictedDf(e) != pool.RestrictedDf(*best)) {
      better = pool.RestrictedDf(e) > pool.RestrictedDf(*best);
    } else {
      better = pool.label(e) < pool.label(*best);
    }
    if (better) {
      best = e;
      best_balance = balance;
    }
  }
  return best;
}

void ApplyAnswer(Belief &belief, QuestionPool &pool, EntityId e, Answer answer) {
  if (!pool.Contains(e)) {
    throw InvalidArgument("entity is not in the question pool");
  }
  CheckAligned(belief, pool, e);
  if (answer != Answer::kNotSure) {
    const Bitset &present = pool.Restricted(e);
    const bool want = answer == Answer::kYes;
    std::vector<bool> agrees(belief.size());
    for (std::size_t i = 0; i < belief.size(); ++i) {
      agrees[i] = present.Test(i) == want;
    }
    belief.AddAgreement(agrees);
  }
  pool.Remove(e);
}

std::vector<DocIndex> FinalRanking(const Belief &belief,
                                   std::span<const double> lr_probs) {
  std::vector<std::size_t> order(belief.size());
  std::iota(order.begin(), order.end(), 0);
  const auto &docs = belief.candidates();
  auto lr = [&](std::size_t i) {
    return docs[i] < lr_probs.size() ? lr_probs[docs[i]] : 0.0;
  };
  // Equal denominators, so comparing masses compares pi exactly.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double ma = belief.Mass(a), mb = belief.Mass(b);
    if (ma != mb) return ma > mb;
    double la = lr(a), lb = lr(b);
    if (la != lb) return la > lb;
    return docs[a] < docs[b];
  });
  std::vector<DocIndex> ranking;
  ranking.reserve(order.size());
  for (std::size_t i : order) ranking.push_back(docs[i]);
  return ranking;
}

Session::Session(Belief belief, QuestionPool pool, std::size_t budget,
                 std::vector<double> lr_probs, Selector selector,
                 std::uint64_t seed)
    : belief_(std::move(belief)),
      pool_(std::move(pool)),
      budget_(budget),
      lr_probs_(std::move(lr_probs)),
      selector_(selector),
      rng_(seed) {}

void Session::TrackTargets(std::vector<DocIndex> targets) {
  targets_.clear();
  for (DocIndex d : targets) {
    if (belief_.Position(d)) targets_.push_back(d);
  }
  std::sort(targets_.begin(), targets_.end());
}

bool Session::finished() const {
  return !pending_ && (asked_ >= budget_ || pool_.empty());
}

std::optional<Question> Session::NextQuestion() {
  if (pending_) return pending_;
  if (asked_ >= budget_ || pool_.empty()) return std::nullopt;
  std::optional<EntityId> e;
  if (selector_ == Selector::kGbs) {
    e = SelectQuestion(belief_, pool_);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
    e = pool_.entities()[pick(rng_)];
  }
  if (!e) return std::nullopt;
  const std::string &label = pool_.label(*e);
  pending_ = Question{*e, label, QuestionText(label)};
  return pending_;
}

const QuestionRecord &Session::Submit(Answer answer) {
  if (!pending_) throw InvalidArgument("no question is pending");
  QuestionRecord record;
  record.entity = pending_->entity;
  record.label = pending_->label;
  record.answer = answer;
  record.entropy_before = PreferenceEntropy(belief_);
  ApplyAnswer(belief_, pool_, pending_->entity, answer);
  record.entropy_after = PreferenceEntropy(belief_);
  if (!targets_.empty()) {
    auto ranking = Ranking();
    std::size_t last = 0;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      if (std::binary_search(targets_.begin(), targets_.end(), ranking[r])) {
        last = r + 1;
      }
    }
    record.last_rel_after = last;
  }
  pending_.reset();
  ++asked_;
  transcript_.push_back(std::move(record));
  return transcript_.back();
}

std::vector<DocIndex> Session::Ranking() const {
  return FinalRanking(belief_, lr_probs_);
}

SessionResult RunSession(Session &session, AnswerSource &source) {
  while (auto question = session.NextQuestion()) {
    session.Submit(source.Ask(*question));
  }
  return {session.Ranking(), session.transcript(), session.pool_exhausted()};
}

SessionResult RunSession(const Belief &belief, const QuestionPool &pool,
                         AnswerSource &source, std::size_t n_questions,
                         std::span<const double> lr_probs,
                         std::vector<DocIndex> targets) {
  Session session(belief, pool, n_questions,
                  std::vector<double>(lr_probs.begin(), lr_probs.end()));
  if (!targets.empty()) session.TrackTargets(std::move(targets));
  return RunSession(session, source);
}

SessionResult RunRandomSession(const Belief &belief, const QuestionPool &pool,
                               AnswerSource &source, std::size_t n_questions,
                               std::span<const double> lr_probs,
                               std::uint64_t seed,
                               std::vector<DocIndex> targets) {
  Session session(belief, pool, n_questions,
                  std::vector<double>(lr_probs.begin(), lr_probs.end()),
                  Selector::kRandom, seed);
  if (!targets.empty()) session.TrackTargets(std::move(targets));
  return RunSession(session, source);
}

}  // namespace sbstar
