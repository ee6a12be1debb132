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

#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "sbstar/reviewer.h"
#include "sbstar/service.h"
#include "synthetic.h"

namespace sbstar {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

int StatusOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const ServiceError &e) {
    return e.status();
  }
  return 0;
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    testing::SyntheticSpec spec;
    spec.num_docs = 250;
    spec.num_topics = 2;
    spec.relevant_per_topic = 15;
    spec.generic_entities = 30;
    spec.seed = 21;
    bundle_ = new CorpusBundle(testing::MakeSyntheticBundle(spec));
  }
  static void TearDownTestSuite() { delete bundle_; }

  void SetUp() override {
    dir_ = testing::TempDir("sbstar-service");
    config_.bundle = (dir_ / "bundle").string();
    config_.state_dir = (dir_ / "sessions").string();
    config_.stop_ratio = 0.2;
    config_.n_questions = 5;
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::vector<std::string> Ids(const json &ranking) {
    std::vector<std::string> ids;
    for (const auto &row : ranking.at("ranking")) ids.push_back(row.at("external_id"));
    return ids;
  }

  static CorpusBundle *bundle_;
  fs::path dir_;
  RunConfig config_;
};
CorpusBundle *ServiceTest::bundle_ = nullptr;

TEST_F(ServiceTest, SessionLifecycle) {
  SessionManager m(*bundle_, config_);
  ASSERT_EQ(m.Topics().size(), 2u);
  json h = m.Create({{"topic_id", "T0"}});
  const std::string id = h.at("session_id");
  EXPECT_EQ(h.at("state"), "ready_for_question");
  EXPECT_EQ(h.at("budget"), 5);
  EXPECT_TRUE(fs::is_regular_file(dir_ / "bundle/checkpoints/T0_0.2.json"));

  EXPECT_EQ(StatusOf([&] { m.SubmitAnswer(id, "yes"); }), 409);
  EXPECT_EQ(StatusOf([&] { m.SubmitAnswer(id, "perhaps"); }), 400);
  json q = m.NextQuestion(id);
  EXPECT_EQ(q.at("state"), "awaiting_answer");
  ASSERT_TRUE(q.at("question").is_object());
  EXPECT_EQ(m.NextQuestion(id).at("question"), q.at("question"));

  json before = m.Ranking(id, 0);
  json a = m.SubmitAnswer(id, "not_sure");
  EXPECT_EQ(a.at("applied").at("answer"), "not_sure");
  EXPECT_EQ(Ids(m.Ranking(id, 0)), Ids(before));
  EXPECT_EQ(m.Ranking(id, 3).at("ranking").size(), 3u);
  EXPECT_EQ(m.Ranking(id, 0).at("total"), before.at("total"));

  for (int i = 0; i < 4; ++i) {
    m.NextQuestion(id);
    m.SubmitAnswer(id, i % 2 ? "yes" : "no");
  }
  EXPECT_EQ(m.Handle(id).at("state"), "finished");
  EXPECT_TRUE(m.NextQuestion(id).at("question").is_null());
  EXPECT_EQ(m.Transcript(id).size(), 5u);
  EXPECT_TRUE(m.Transcript(id)[0].contains("last_rel_after"));
}

TEST_F(ServiceTest, Errors) {
  SessionManager m(*bundle_, config_);
  EXPECT_EQ(StatusOf([&] { m.Handle("nope"); }), 404);
  EXPECT_EQ(StatusOf([&] { m.Create({{"topic_id", "T9"}}); }), 404);
  EXPECT_EQ(StatusOf([&] { m.Create({{"topic_id", "T0"}, {"stop_ratio", 0}}); }), 400);
  EXPECT_EQ(StatusOf([&] { m.Create(json::object()); }), 400);
  EXPECT_EQ(StatusOf([&] { m.Create({{"topic_id", "T0"}, {"stop_ratio", 1.0}}); }), 409);
}

TEST_F(ServiceTest, IdempotentRetries) {
  SessionManager m(*bundle_, config_);
  json h1 = m.Create({{"topic_id", "T1"}}, "create-1");
  json h2 = m.Create({{"topic_id", "T1"}}, "create-1");
  EXPECT_EQ(h1.at("session_id"), h2.at("session_id"));
  EXPECT_EQ(m.size(), 1u);
  const std::string id = h1.at("session_id");
  m.NextQuestion(id);
  json a1 = m.SubmitAnswer(id, "yes", "k1");
  json a2 = m.SubmitAnswer(id, "yes", "k1");
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(m.Transcript(id).size(), 1u);
}

TEST_F(ServiceTest, RestoresFromStateDir) {
  std::string id;
  json ranking, transcript;
  {
    SessionManager m(*bundle_, config_);
    id = m.Create({{"topic_id", "T0"}}).at("session_id");
    for (const char *ans : {"yes", "no"}) {
      m.NextQuestion(id);
      m.SubmitAnswer(id, ans);
    }
    m.NextQuestion(id);  // leave one pending
    ranking = m.Ranking(id, 0);
    transcript = m.Transcript(id);
  }
  SessionManager restored(*bundle_, config_);
  EXPECT_EQ(restored.size(), 1u);
  EXPECT_EQ(restored.Ranking(id, 0), ranking);
  EXPECT_EQ(restored.Transcript(id), transcript);
  EXPECT_EQ(restored.Handle(id).at("state"), "awaiting_answer");
  restored.SubmitAnswer(id, "yes");
  EXPECT_EQ(restored.Transcript(id).size(), 3u);
}

TEST_F(ServiceTest, MatchesLibrarySession) {
  SessionManager m(*bundle_, config_);
  const std::string id = m.Create({{"topic_id", "T0"}}).at("session_id");

  const Topic &topic = *bundle_->FindTopic("T0");
  CalState cal = RunCal(bundle_->store, bundle_->features, topic, bundle_->qrels, 0.2, {});
  MissingSet missing = ComputeMissing(bundle_->qrels, "T0", bundle_->store, cal);
  ASSERT_FALSE(missing.empty());
  auto cands = cal.Unreviewed();
  Belief belief = InitBelief(cal.relevance_probs, cands);
  QuestionPool pool(bundle_->matrix, belief.candidates(),
                    FilterEntityPool(bundle_->matrix, cands, 1, 1.0));
  OracleReviewer oracle(bundle_->matrix, missing);
  SessionResult want = RunSession(belief, pool, oracle, 5, cal.relevance_probs);

  for (const auto &record : want.transcript) {
    json q = m.NextQuestion(id);
    ASSERT_EQ(q.at("question").at("entity"), record.label);
    m.SubmitAnswer(id, std::string(AnswerName(record.answer)));
  }
  std::vector<std::string> want_ids;
  for (DocIndex d : want.ranking) want_ids.push_back(bundle_->store.doc(d).external_id);
  EXPECT_EQ(Ids(m.Ranking(id, 0)), want_ids);
}

TEST_F(ServiceTest, BlindAndStalled) {
  config_.blind = true;
  config_.answer_timeout_seconds = 0.01;
  SessionManager m(*bundle_, config_);
  const std::string id = m.Create({{"topic_id", "T0"}}).at("session_id");
  m.NextQuestion(id);
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_TRUE(m.Handle(id).at("stalled").get<bool>());
  m.SubmitAnswer(id, "no");
  EXPECT_FALSE(m.Handle(id).at("stalled").get<bool>());
  EXPECT_FALSE(m.Transcript(id)[0].contains("last_rel_after"));
}

TEST_F(ServiceTest, HttpEndpoints) {
  SessionManager m(*bundle_, config_);
  HttpService service(m);
  int port = service.BindToAnyPort("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread server([&] { service.ListenAfterBind(); });
  httplib::Client client("127.0.0.1", port);

  auto topics = client.Get("/topics");
  ASSERT_TRUE(topics);
  EXPECT_EQ(topics->status, 200);
  EXPECT_EQ(topics->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_EQ(json::parse(topics->body).size(), 2u);

  auto created = client.Post("/sessions", R"({"topic_id":"T1","n_questions":3})",
                             "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const std::string id = json::parse(created->body).at("session_id");
  const std::string base = "/sessions/" + id;

  EXPECT_EQ(client.Get("/sessions/missing")->status, 404);
  EXPECT_EQ(client.Post(base + "/answer", R"({"answer":"yes"})", "application/json")->status,
            409);
  auto q = client.Get(base + "/question");
  EXPECT_EQ(q->status, 200);
  EXPECT_EQ(json::parse(q->body).at("state"), "awaiting_answer");
  EXPECT_EQ(client.Post(base + "/answer", R"({"answer":"maybe"})", "application/json")->status,
            400);
  EXPECT_EQ(client.Post(base + "/answer", R"([1])", "application/json")->status, 400);

  auto before = client.Get(base + "/ranking?all=1");
  httplib::Headers key = {{"Idempotency-Key", "answer-1"}};
  auto first = client.Post(base + "/answer", key, R"({"answer":"not_sure"})", "application/json");
  auto retry = client.Post(base + "/answer", key, R"({"answer":"not_sure"})", "application/json");
  EXPECT_EQ(first->status, 200);
  EXPECT_EQ(retry->status, 200);
  EXPECT_EQ(first->body, retry->body);
  auto after = client.Get(base + "/ranking?all=1");
  EXPECT_EQ(Ids(json::parse(after->body)), Ids(json::parse(before->body)));

  client.Get(base + "/question");
  EXPECT_EQ(client.Post(base + "/answer", "\"yes\"", "application/json")->status, 200);
  client.Get(base + "/question");
  EXPECT_EQ(client.Post(base + "/answer", "no", "text/plain")->status, 200);
  EXPECT_EQ(json::parse(client.Get(base)->body).at("state"), "finished");

  auto transcript = client.Get(base + "/transcript");
  EXPECT_EQ(json::parse(transcript->body), m.Transcript(id));
  EXPECT_EQ(json::parse(transcript->body).size(), 3u);
  EXPECT_EQ(json::parse(client.Get(base + "/ranking?k=4")->body).at("ranking").size(), 4u);
  EXPECT_EQ(json::parse(client.Get(base + "/ranking")->body).at("ranking").size(),
            config_.top_k);
  EXPECT_EQ(client.Get(base + "/ranking?k=x")->status, 400);

  service.Stop();
  server.join();
}

}  // namespace
}  // namespace sbstar
