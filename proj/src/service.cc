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

#include "sbstar/service.h"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "httplib.h"
#include "sbstar/cal.h"
#include "sbstar/error.h"
#include "sbstar/incidence.h"
#include "sbstar/reviewer.h"
#include "sbstar/transcript.h"

namespace sbstar {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view SessionStateName(SessionState s) {
  switch (s) {
    case SessionState::kReadyForQuestion:
      return "ready_for_question";
    case SessionState::kAwaitingAnswer:
      return "awaiting_answer";
    case SessionState::kFinished:
      return "finished";
  }
  return "finished";
}

struct SessionManager::Entry {
  mutable std::mutex mu;
  std::string id;
  std::string topic_id;
  double stop_ratio = 0.0;
  std::size_t n_questions = 0;
  std::string create_key;
  std::unique_ptr<Session> session;
  SessionState state = SessionState::kReadyForQuestion;
  Clock::time_point asked_at;
  std::map<std::string, json> answer_keys;
};

namespace {

std::string NewSessionId() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard<std::mutex> lock(mu);
  std::ostringstream id;
  id << std::hex << rng();
  return id.str();
}

std::string SafeName(std::string s) {
  for (char &c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') {
      c = '_';
    }
  }
  return s;
}

void WriteAtomically(const fs::path &path, const std::string &text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

json QuestionJson(const Question &q) {
  return {{"entity", q.label}, {"text", q.text}};
}

}  // namespace

SessionManager::SessionManager(const CorpusBundle &bundle, RunConfig config)
    : bundle_(bundle), config_(std::move(config)) {
  config_.Validate();
  if (!config_.state_dir.empty()) {
    fs::create_directories(config_.state_dir);
    Restore();
  }
}

SessionManager::~SessionManager() = default;

std::size_t SessionManager::size() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

const CalState &SessionManager::Checkpoint(const std::string &topic_id,
                                           double stop_ratio) {
  std::lock_guard<std::mutex> lock(checkpoint_mu_);
  auto key = std::make_pair(topic_id, stop_ratio);
  auto it = checkpoints_.find(key);
  if (it != checkpoints_.end()) return *it->second;

  const Topic *topic = bundle_.FindTopic(topic_id);
  if (topic == nullptr) throw ServiceError(404, "unknown topic " + topic_id);
  char ratio[32];
  std::snprintf(ratio, sizeof(ratio), "%.6g", stop_ratio);
  fs::path dir = fs::path(config_.bundle) / "checkpoints";
  fs::path path = dir / (SafeName(topic_id) + "_" + ratio + ".json");
  std::unique_ptr<CalState> state;
  if (fs::is_regular_file(path)) {
    state = std::make_unique<CalState>(LoadCalState(path, bundle_.store));
  } else {
    state = std::make_unique<CalState>(RunCal(bundle_.store, bundle_.features, *topic,
                                              bundle_.qrels, stop_ratio, config_.cal));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!ec) SaveCalState(*state, bundle_.store, path);
  }
  return *checkpoints_.emplace(key, std::move(state)).first->second;
}

std::shared_ptr<SessionManager::Entry> SessionManager::Build(
    const std::string &id, const std::string &topic_id, double stop_ratio,
    std::size_t n_questions) {
  if (!(stop_ratio > 0.0 && stop_ratio <= 1.0)) {
    throw ServiceError(400, "stop_ratio must lie in (0, 1]");
  }
  if (bundle_.FindTopic(topic_id) == nullptr) {
    throw ServiceError(404, "unknown topic " + topic_id);
  }
  const CalState &cal = Checkpoint(topic_id, stop_ratio);
  std::vector<DocIndex> candidates = cal.Unreviewed();
  if (candidates.empty()) {
    throw ServiceError(409, "every document was reviewed before the stopping point");
  }
  auto pool_entities =
      FilterEntityPool(bundle_.matrix, candidates, config_.sbstar.pool.min_df,
                       config_.sbstar.pool.max_df_ratio);
  Belief belief = InitBelief(cal.relevance_probs, candidates,
                             config_.sbstar.alpha_floor, config_.sbstar.kappa);
  QuestionPool pool(bundle_.matrix, belief.candidates(), std::move(pool_entities));

  auto entry = std::make_shared<Entry>();
  entry->id = id;
  entry->topic_id = topic_id;
  entry->stop_ratio = stop_ratio;
  entry->n_questions = n_questions;
  entry->session = std::make_unique<Session>(std::move(belief), std::move(pool),
                                             n_questions, cal.relevance_probs);
  if (!config_.blind && bundle_.qrels.HasTopic(topic_id)) {
    entry->session->TrackTargets(
        ComputeMissing(bundle_.qrels, topic_id, bundle_.store, cal).docs);
  }
  entry->state = entry->session->finished() ? SessionState::kFinished
                                            : SessionState::kReadyForQuestion;
  return entry;
}

std::shared_ptr<SessionManager::Entry> SessionManager::Find(const std::string &id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session " + id);
  return it->second;
}

json SessionManager::HandleLocked(const Entry &entry) const {
  const Session &s = *entry.session;
  json handle = {{"session_id", entry.id},
                 {"topic_id", entry.topic_id},
                 {"stop_ratio", entry.stop_ratio},
                 {"state", std::string(SessionStateName(entry.state))},
                 {"budget", s.budget()},
                 {"questions_asked", s.asked()},
                 {"questions_remaining", s.questions_remaining()},
                 {"candidates", s.belief().size()},
                 {"pool_remaining", s.pool().size()},
                 {"pool_exhausted", s.pool_exhausted()}};
  handle["pending_question"] = s.pending() ? QuestionJson(*s.pending()) : json(nullptr);
  bool stalled = entry.state == SessionState::kAwaitingAnswer &&
                 Clock::now() - entry.asked_at >
                     std::chrono::duration<double>(config_.answer_timeout_seconds);
  handle["stalled"] = stalled;
  return handle;
}

json SessionManager::Create(const json &request, const std::string &idempotency_key) {
  if (!request.is_object()) throw ServiceError(400, "request body must be a JSON object");
  if (!idempotency_key.empty()) {
    std::shared_lock lock(sessions_mu_);
    auto it = create_keys_.find(idempotency_key);
    if (it != create_keys_.end()) return it->second;
  }
  std::string topic_id;
  double stop_ratio = config_.stop_ratio;
  std::size_t n_questions = config_.n_questions;
  try {
    topic_id = request.at("topic_id").get<std::string>();
    if (request.contains("stop_ratio")) stop_ratio = request["stop_ratio"].get<double>();
    if (request.contains("n_questions")) {
      n_questions = request["n_questions"].get<std::size_t>();
    }
  } catch (const json::exception &e) {
    throw ServiceError(400, std::string("bad session request: ") + e.what());
  }

  auto entry = Build(NewSessionId(), topic_id, stop_ratio, n_questions);
  entry->create_key = idempotency_key;
  json handle;
  {
    std::lock_guard<std::mutex> lock(entry->mu);
    handle = HandleLocked(*entry);
    Persist(*entry);
  }
  std::unique_lock lock(sessions_mu_);
  if (!idempotency_key.empty()) {
    // A concurrent retry may have won the race.
    auto it = create_keys_.find(idempotency_key);
    if (it != create_keys_.end()) return it->second;
    create_keys_[idempotency_key] = handle;
  }
  sessions_[entry->id] = entry;
  return handle;
}

json SessionManager::Handle(const std::string &id) const {
  auto entry = Find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  return HandleLocked(*entry);
}

json SessionManager::NextQuestion(const std::string &id) {
  auto entry = Find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  Session &s = *entry->session;
  if (entry->state == SessionState::kReadyForQuestion) {
    if (s.NextQuestion()) {
      entry->state = SessionState::kAwaitingAnswer;
      entry->asked_at = Clock::now();
    } else {
      entry->state = SessionState::kFinished;
    }
    Persist(*entry);
  }
  json out = HandleLocked(*entry);
  out["question"] = s.pending() ? QuestionJson(*s.pending()) : json(nullptr);
  out["progress"] = {{"asked", s.asked()}, {"budget", s.budget()}};
  return out;
}

json SessionManager::SubmitAnswer(const std::string &id, const std::string &answer,
                                  const std::string &idempotency_key) {
  auto entry = Find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  if (!idempotency_key.empty()) {
    auto it = entry->answer_keys.find(idempotency_key);
    if (it != entry->answer_keys.end()) return it->second;
  }
  Answer parsed;
  try {
    parsed = ParseAnswer(answer);
  } catch (const InvalidArgument &e) {
    throw ServiceError(400, e.what());
  }
  if (entry->state != SessionState::kAwaitingAnswer) {
    throw ServiceError(409, "session is not awaiting an answer");
  }
  const QuestionRecord &record = entry->session->Submit(parsed);
  entry->state = entry->session->finished() ? SessionState::kFinished
                                            : SessionState::kReadyForQuestion;
  json out = HandleLocked(*entry);
  out["applied"] = TranscriptToJson({record}, !config_.blind).at(0);
  if (!idempotency_key.empty()) entry->answer_keys[idempotency_key] = out;
  Persist(*entry);
  return out;
}

json SessionManager::Ranking(const std::string &id, std::size_t k) const {
  auto entry = Find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  const Session &s = *entry->session;
  auto ranking = s.Ranking();
  auto pi = Preference(s.belief());
  const std::size_t n = k == 0 ? ranking.size() : std::min(k, ranking.size());
  json rows = json::array();
  for (std::size_t r = 0; r < n; ++r) {
    DocIndex d = ranking[r];
    const Document &doc = bundle_.store.doc(d);
    rows.push_back({{"rank", r + 1},
                    {"external_id", doc.external_id},
                    {"title", doc.title},
                    {"score", pi[*s.belief().Position(d)]}});
  }
  return {{"session_id", entry->id},
          {"questions_asked", s.asked()},
          {"total", ranking.size()},
          {"ranking", std::move(rows)}};
}

json SessionManager::Transcript(const std::string &id) const {
  auto entry = Find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  return TranscriptToJson(entry->session->transcript(), !config_.blind);
}

json SessionManager::Topics() const {
  json out = json::array();
  for (const auto &t : bundle_.topics) {
    out.push_back({{"topic_id", t.topic_id}, {"title", t.title_text}});
  }
  return out;
}

void SessionManager::Persist(const Entry &entry) const {
  if (config_.state_dir.empty()) return;
  json answers = json::array();
  for (const auto &r : entry.session->transcript()) {
    answers.push_back({{"entity", r.label}, {"answer", std::string(AnswerName(r.answer))}});
  }
  json state = {{"session_id", entry.id},
                {"topic_id", entry.topic_id},
                {"stop_ratio", entry.stop_ratio},
                {"n_questions", entry.n_questions},
                {"state", std::string(SessionStateName(entry.state))},
                {"create_key", entry.create_key},
                {"answers", answers},
                {"answer_keys", entry.answer_keys}};
  WriteAtomically(fs::path(config_.state_dir) / (entry.id + ".json"), state.dump());
}

void SessionManager::Restore() {
  for (const auto &file : fs::directory_iterator(config_.state_dir)) {
    if (file.path().extension() != ".json") continue;
    try {
      json state = json::parse(ReadFile(file.path()));
      auto entry = Build(state.at("session_id").get<std::string>(),
                         state.at("topic_id").get<std::string>(),
                         state.at("stop_ratio").get<double>(),
                         state.at("n_questions").get<std::size_t>());
      Session &s = *entry->session;
      for (const auto &row : state.at("answers")) {
        auto q = s.NextQuestion();
        if (!q || q->label != row.at("entity").get<std::string>()) {
          throw Error("replayed question differs from the recorded one");
        }
        s.Submit(ParseAnswer(row.at("answer").get<std::string>()));
      }
      entry->state = s.finished() ? SessionState::kFinished
                                  : SessionState::kReadyForQuestion;
      if (state.value("state", "") == "awaiting_answer" && s.NextQuestion()) {
        entry->state = SessionState::kAwaitingAnswer;
        entry->asked_at = Clock::now();
      }
      entry->create_key = state.value("create_key", "");
      for (const auto &item : state.value("answer_keys", json::object()).items()) {
        entry->answer_keys[item.key()] = item.value();
      }
      if (!entry->create_key.empty()) create_keys_[entry->create_key] = HandleLocked(*entry);
      sessions_[entry->id] = entry;
    } catch (const std::exception &e) {
      std::cerr << "skipping session state " << file.path() << ": " << e.what() << "\n";
    }
  }
}

HttpService::HttpService(SessionManager &manager)
    : manager_(manager), server_(std::make_unique<httplib::Server>()) {
  using httplib::Request;
  using httplib::Response;
  auto &svr = *server_;

  auto reply = [](Response &res, int status, const json &body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  // Runs fn, mapping library errors onto HTTP statuses.
  auto guarded = [reply](auto fn) {
    return [reply, fn](const Request &req, Response &res) {
      try {
        fn(req, res);
      } catch (const ServiceError &e) {
        reply(res, e.status(), {{"error", e.what()}});
      } catch (const InvalidArgument &e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const json::exception &e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const std::exception &e) {
        reply(res, 500, {{"error", e.what()}});
      }
    };
  };
  auto key = [](const Request &req) { return req.get_header_value("Idempotency-Key"); };

  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type, Idempotency-Key"}});
  svr.Options(R"(/.*)", [](const Request &, Response &res) { res.status = 204; });

  svr.Get("/topics", guarded([this, reply](const Request &, Response &res) {
            reply(res, 200, manager_.Topics());
          }));
  svr.Post("/sessions", guarded([this, reply, key](const Request &req, Response &res) {
             json body = req.body.empty() ? json::object() : json::parse(req.body);
             reply(res, 201, manager_.Create(body, key(req)));
           }));
  svr.Get(R"(/sessions/([^/]+))",
          guarded([this, reply](const Request &req, Response &res) {
            reply(res, 200, manager_.Handle(req.matches[1]));
          }));
  svr.Get(R"(/sessions/([^/]+)/question)",
          guarded([this, reply](const Request &req, Response &res) {
            reply(res, 200, manager_.NextQuestion(req.matches[1]));
          }));
  svr.Post(R"(/sessions/([^/]+)/answer)",
           guarded([this, reply, key](const Request &req, Response &res) {
             std::string answer = req.body;
             json parsed = json::parse(req.body, nullptr, false);
             if (!parsed.is_discarded()) {
               if (parsed.is_object() && parsed.contains("answer") &&
                   parsed["answer"].is_string()) {
                 answer = parsed["answer"].get<std::string>();
               } else if (parsed.is_string()) {
                 answer = parsed.get<std::string>();
               } else {
                 throw ServiceError(400, "expected {\"answer\": \"yes|no|not_sure\"}");
               }
             }
             reply(res, 200, manager_.SubmitAnswer(req.matches[1], answer, key(req)));
           }));
  svr.Get(R"(/sessions/([^/]+)/ranking)",
          guarded([this, reply](const Request &req, Response &res) {
            std::size_t k = manager_.config().top_k;
            if (req.has_param("all")) k = 0;
            if (req.has_param("k")) {
              std::string v = req.get_param_value("k");
              if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
                throw ServiceError(400, "k must be a positive integer");
              }
              k = std::stoul(v);
            }
            reply(res, 200, manager_.Ranking(req.matches[1], k));
          }));
  svr.Get(R"(/sessions/([^/]+)/transcript)",
          guarded([this, reply](const Request &req, Response &res) {
            reply(res, 200, manager_.Transcript(req.matches[1]));
          }));
}

HttpService::~HttpService() { Stop(); }

bool HttpService::Listen(const std::string &host, int port) {
  return server_->listen(host, port);
}

int HttpService::BindToAnyPort(const std::string &host) {
  return server_->bind_to_any_port(host);
}

bool HttpService::ListenAfterBind() { return server_->listen_after_bind(); }

void HttpService::Stop() {
  if (server_) server_->stop();
}

}  // namespace sbstar
