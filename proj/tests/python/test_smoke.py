# Copyright 2026 The SBSTAR Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import json
import random

import pytest

import sbstar


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    rng = random.Random(3)
    relevant = set(rng.sample(range(200), 15))
    hard = set(list(relevant)[:6])
    with open(root / "corpus.jsonl", "w") as f, open(root / "ann.jsonl", "w") as a:
        for i in range(200):
            words = [f"w{rng.randrange(500)}" for _ in range(30)]
            ents = [f"Generic {g}" for g in range(20) if rng.random() < 0.08]
            if i in relevant:
                if i not in hard:
                    words += ["cardiac", "arrest"] * 2
                ents.append("Heart")
            elif rng.random() < 0.2:
                ents.append("Heart")
            f.write(json.dumps({"external_id": f"d{i}", "title": f"Doc {i}", "body": " ".join(words)}) + "\n")
            a.write(json.dumps({"external_id": f"d{i}", "entities": ents}) + "\n")
    with open(root / "qrels.txt", "w") as f:
        for i in range(200):
            f.write(f"T1 0 d{i} {int(i in relevant)}\n")
    (root / "topics.jsonl").write_text(json.dumps({"topic_id": "T1", "title": "cardiac arrest"}) + "\n")
    info = sbstar.ingest(str(root / "corpus.jsonl"), str(root / "qrels.txt"),
                         str(root / "topics.jsonl"), str(root / "bundle"),
                         annotations=str(root / "ann.jsonl"))
    assert info["documents"] == 200
    again = sbstar.ingest(str(root / "corpus.jsonl"), str(root / "qrels.txt"),
                          str(root / "topics.jsonl"), str(root / "bundle"),
                          annotations=str(root / "ann.jsonl"))
    assert again["cache_hit"]
    return sbstar.Bundle.load(str(root / "bundle")), root


def test_bundle_properties(bundle):
    b, _ = bundle
    assert b.num_docs == 200
    assert b.topic_ids == ["T1"]
    assert b.num_entities >= 2


def test_run_cal(bundle):
    b, _ = bundle
    state = sbstar.run_cal(b, "T1", 0.25)
    assert len(state["reviewed"]) == 50
    assert state == sbstar.run_cal(b, "T1", 0.25)


def test_simulate_writes_reports(bundle, tmp_path):
    b, _ = bundle
    runs = sbstar.simulate(b, {"stop_ratios": [0.2], "question_counts": [3],
                               "strategies": ["lr", "sbstar"]}, out_dir=str(tmp_path))
    assert {r["strategy"] for r in runs} == {"lr", "sbstar"}
    assert (tmp_path / "heatmap_sbstar.csv").exists()
    for r in runs:
        if r["status"] == "ok":
            assert r["effort"] == r["cal_reviewed"] + r["last_rel"] + r["questions_asked"]


def test_metrics():
    assert sbstar.average_precision([3, 1, 2], [1]) == pytest.approx(0.5)
    assert sbstar.average_precision([3, 1], []) is None
    assert sbstar.last_rel([3, 1, 2], [3, 2]) == 3
    with pytest.raises(sbstar.InvalidArgument):
        sbstar.last_rel([3], [9])


def test_sessions(bundle, tmp_path):
    b, root = bundle
    s = sbstar.Sessions(b, {"bundle": str(root / "bundle"), "state_dir": str(tmp_path)})
    h = s.create("T1", stop_ratio=0.2, n_questions=2)
    sid = h["session_id"]
    with pytest.raises(sbstar.ServiceError):
        s.answer(sid, "yes")
    q = s.next_question(sid)
    assert q["state"] == "awaiting_answer"
    before = s.ranking(sid)
    s.answer(sid, "not_sure", idempotency_key="a")
    s.answer(sid, "not_sure", idempotency_key="a")
    assert [r["external_id"] for r in s.ranking(sid)["ranking"]] == \
        [r["external_id"] for r in before["ranking"]]
    assert len(s.transcript(sid)) == 1
    with pytest.raises(sbstar.ServiceError):
        s.handle("missing")
