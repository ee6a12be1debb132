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

"""High-recall document review: continuous active learning plus entity questions."""

import json as _json
from typing import Any, Dict, List, Optional, Sequence

from . import _core
from ._core import Bundle, Error, FormatError, InvalidArgument, ServiceError, average_precision, last_rel

__all__ = [
    "Bundle",
    "Error",
    "FormatError",
    "InvalidArgument",
    "ServiceError",
    "Sessions",
    "average_precision",
    "ingest",
    "last_rel",
    "run_cal",
    "simulate",
]


def ingest(corpus: str, qrels: str, topics: str, bundle_dir: str,
           annotations: Optional[str] = None, lexicon: Optional[str] = None) -> Dict[str, Any]:
    """Builds (or reuses) a corpus bundle directory."""
    return _json.loads(_core.ingest(corpus, qrels, topics, bundle_dir, annotations, lexicon))


def run_cal(bundle: Bundle, topic_id: str, stop_ratio: float, seed: int = 1) -> Dict[str, Any]:
    """Runs CAL to the stop ratio and returns the checkpoint as a dict."""
    return _json.loads(_core.run_cal(bundle, topic_id, stop_ratio, seed))


def simulate(bundle: Bundle, config: Optional[Dict[str, Any]] = None,
             topics: Sequence[str] = (), out_dir: Optional[str] = None) -> List[Dict[str, Any]]:
    """Runs the simulation grid; returns one dict per (topic, stop, strategy, budget)."""
    return _json.loads(_core.simulate(bundle, _json.dumps(config or {}), list(topics), out_dir))


class Sessions:
    """In-process equivalent of the HTTP session API."""

    def __init__(self, bundle: Bundle, config: Optional[Dict[str, Any]] = None):
        self._bundle = bundle
        self._m = _core.SessionManager(bundle, _json.dumps(config or {}))

    def create(self, topic_id: str, idempotency_key: str = "", **params: Any) -> Dict[str, Any]:
        return _json.loads(self._m.create(_json.dumps({"topic_id": topic_id, **params}),
                                          idempotency_key))

    def handle(self, session_id: str) -> Dict[str, Any]:
        return _json.loads(self._m.handle(session_id))

    def next_question(self, session_id: str) -> Dict[str, Any]:
        return _json.loads(self._m.next_question(session_id))

    def answer(self, session_id: str, answer: str, idempotency_key: str = "") -> Dict[str, Any]:
        return _json.loads(self._m.submit_answer(session_id, answer, idempotency_key))

    def ranking(self, session_id: str, k: int = 0) -> Dict[str, Any]:
        return _json.loads(self._m.ranking(session_id, k))

    def transcript(self, session_id: str) -> List[Dict[str, Any]]:
        return _json.loads(self._m.transcript(session_id))
