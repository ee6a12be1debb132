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

#ifndef SBSTAR_SERVICE_H_
#define SBSTAR_SERVICE_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "json.hpp"
#include "sbstar/bundle.h"
#include "sbstar/config.h"
#include "sbstar/sbstar.h"

namespace httplib {
class Server;
}

namespace sbstar {

// Error carrying the HTTP status the adapter should return.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string &message)
      : Error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SessionState { kReadyForQuestion, kAwaitingAnswer, kFinished };

std::string_view SessionStateName(SessionState s);

// Live human-answered SBSTAR sessions. Each session's mutations are
// serialized; distinct sessions proceed independently. Session state is
// written to config.state_dir after every mutation and restored on
// construction by replaying the recorded answers.
class SessionManager {
 public:
  // `bundle` must outlive the manager.
  SessionManager(const CorpusBundle &bundle, RunConfig config);
  ~SessionManager();

  // POST /sessions. Body: {topic_id, stop_ratio?, n_questions?}.
  nlohmann::json Create(const nlohmann::json &request,
                        const std::string &idempotency_key = "");
  // GET /sessions/{id}
  nlohmann::json Handle(const std::string &id) const;
  // GET /sessions/{id}/question. Moves ready -> awaiting.
  nlohmann::json NextQuestion(const std::string &id);
  // POST /sessions/{id}/answer. 409 unless awaiting; 400 on a bad answer.
  nlohmann::json SubmitAnswer(const std::string &id, const std::string &answer,
                              const std::string &idempotency_key = "");
  // GET /sessions/{id}/ranking. k == 0 returns the full ranking.
  nlohmann::json Ranking(const std::string &id, std::size_t k) const;
  // GET /sessions/{id}/transcript
  nlohmann::json Transcript(const std::string &id) const;
  // GET /topics
  nlohmann::json Topics() const;

  std::size_t size() const;
  const RunConfig &config() const { return config_; }

 private:
  struct Entry;

  std::shared_ptr<Entry> Find(const std::string &id) const;
  std::shared_ptr<Entry> Build(const std::string &id, const std::string &topic_id,
                               double stop_ratio, std::size_t n_questions);
  const CalState &Checkpoint(const std::string &topic_id, double stop_ratio);
  nlohmann::json HandleLocked(const Entry &entry) const;
  void Persist(const Entry &entry) const;
  void Restore();

  const CorpusBundle &bundle_;
  RunConfig config_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, nlohmann::json> create_keys_;
  std::mutex checkpoint_mu_;
  std::map<std::pair<std::string, double>, std::unique_ptr<CalState>> checkpoints_;
};

// JSON-over-HTTP adapter around a SessionManager.
class HttpService {
 public:
  explicit HttpService(SessionManager &manager);
  ~HttpService();

  // Blocks serving on host:port until Stop().
  bool Listen(const std::string &host, int port);
  // Binds an ephemeral port and returns it; serve with ListenAfterBind().
  int BindToAnyPort(const std::string &host);
  bool ListenAfterBind();
  void Stop();

 private:
  SessionManager &manager_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace sbstar

#endif  // SBSTAR_SERVICE_H_
