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

// Python bindings. Structured results cross the boundary as JSON text and
// are decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sbstar/bundle.h"
#include "sbstar/cal.h"
#include "sbstar/config.h"
#include "sbstar/error.h"
#include "sbstar/eval.h"
#include "sbstar/metrics.h"
#include "sbstar/service.h"

namespace py = pybind11;
using namespace sbstar;
using json = nlohmann::json;

namespace {

std::vector<Topic> PickTopics(const CorpusBundle &bundle,
                              const std::vector<std::string> &ids) {
  if (ids.empty()) return bundle.topics;
  std::vector<Topic> out;
  for (const auto &id : ids) {
    const Topic *t = bundle.FindTopic(id);
    if (t == nullptr) throw InvalidArgument("unknown topic " + id);
    out.push_back(*t);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the sbstar package";

  // Base first: the most recently registered translator is tried first.
  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error);
  py::register_exception<FormatError>(m, "FormatError", error);
  py::register_exception<ServiceError>(m, "ServiceError", error);

  m.def(
      "ingest",
      [](const std::string &corpus, const std::string &qrels, const std::string &topics,
         const std::string &bundle_dir, std::optional<std::string> annotations,
         std::optional<std::string> lexicon) {
        IngestInputs in;
        in.corpus = corpus;
        in.qrels = qrels;
        in.topics = topics;
        if (annotations) in.annotations = *annotations;
        if (lexicon) in.lexicon = *lexicon;
        IngestResult r = IngestBundle(in, bundle_dir);
        return json{{"bundle_dir", r.bundle_dir.string()},
                    {"content_hash", r.content_hash},
                    {"cache_hit", r.cache_hit},
                    {"documents", r.documents},
                    {"entities", r.entities},
                    {"warnings", r.warnings}}
            .dump();
      },
      py::arg("corpus"), py::arg("qrels"), py::arg("topics"), py::arg("bundle_dir"),
      py::arg("annotations") = py::none(), py::arg("lexicon") = py::none());

  py::class_<CorpusBundle>(m, "Bundle")
      .def_static("load", [](const std::string &dir) { return LoadBundle(dir); })
      .def_property_readonly("num_docs", [](const CorpusBundle &b) { return b.store.size(); })
      .def_property_readonly("num_entities",
                             [](const CorpusBundle &b) { return b.matrix.num_entities(); })
      .def_property_readonly("topic_ids", [](const CorpusBundle &b) {
        std::vector<std::string> ids;
        for (const auto &t : b.topics) ids.push_back(t.topic_id);
        return ids;
      });

  m.def(
      "run_cal",
      [](const CorpusBundle &b, const std::string &topic_id, double stop_ratio,
         std::uint64_t seed) {
        const Topic *t = b.FindTopic(topic_id);
        if (t == nullptr) throw InvalidArgument("unknown topic " + topic_id);
        CalConfig config;
        config.seed = seed;
        config.lr.seed = seed;
        CalState s;
        {
          py::gil_scoped_release release;
          s = RunCal(b.store, b.features, *t, b.qrels, stop_ratio, config);
        }
        return CalStateToJson(s, b.store).dump();
      },
      py::arg("bundle"), py::arg("topic_id"), py::arg("stop_ratio"), py::arg("seed") = 1);

  m.def(
      "simulate",
      [](const CorpusBundle &b, const std::string &config_json, std::vector<std::string> topics,
         std::optional<std::string> out_dir) {
        RunConfig config = RunConfig::FromJson(json::parse(config_json));
        config.Validate();
        auto picked = PickTopics(b, topics);
        GridResult r;
        {
          py::gil_scoped_release release;
          r = RunGrid(b, picked, config.ToGridOptions());
          if (out_dir) EmitReports(r, *out_dir);
        }
        return RunsToJson(r.runs).dump();
      },
      py::arg("bundle"), py::arg("config_json") = "{}",
      py::arg("topics") = std::vector<std::string>{}, py::arg("out_dir") = py::none());

  m.def(
      "average_precision",
      [](const std::vector<DocIndex> &ranking, const std::vector<DocIndex> &relevant) {
        return AveragePrecision(ranking, relevant);
      },
      py::arg("ranking"), py::arg("relevant"));
  m.def(
      "last_rel",
      [](const std::vector<DocIndex> &ranking, const std::vector<DocIndex> &relevant) {
        return LastRel(ranking, relevant);
      },
      py::arg("ranking"), py::arg("relevant"));

  py::class_<SessionManager>(m, "SessionManager")
      .def(py::init([](const CorpusBundle &b, const std::string &config_json) {
             return std::make_unique<SessionManager>(
                 b, RunConfig::FromJson(json::parse(config_json)));
           }),
           py::arg("bundle"), py::arg("config_json") = "{}", py::keep_alive<1, 2>())
      .def("create",
           [](SessionManager &s, const std::string &request, const std::string &key) {
             return s.Create(json::parse(request), key).dump();
           },
           py::arg("request"), py::arg("idempotency_key") = "")
      .def("handle", [](const SessionManager &s, const std::string &id) {
        return s.Handle(id).dump();
      })
      .def("next_question", [](SessionManager &s, const std::string &id) {
        return s.NextQuestion(id).dump();
      })
      .def("submit_answer",
           [](SessionManager &s, const std::string &id, const std::string &answer,
              const std::string &key) { return s.SubmitAnswer(id, answer, key).dump(); },
           py::arg("session_id"), py::arg("answer"), py::arg("idempotency_key") = "")
      .def("ranking",
           [](const SessionManager &s, const std::string &id, std::size_t k) {
             return s.Ranking(id, k).dump();
           },
           py::arg("session_id"), py::arg("k") = 0)
      .def("transcript", [](const SessionManager &s, const std::string &id) {
        return s.Transcript(id).dump();
      });
}
