"""Policies and the structured JSON action protocol.

A policy receives one request per neighbor batch (question, current paths,
batch of candidate triples) and must answer with one JSON object:

    {"answers": [...], "exploration_paths": [[entity, relation, entity, ...], ...]}

Extra keys are tolerated; surrounding prose is tolerated (the first JSON
object carrying both required keys is extracted). Anything else is a format
failure, which the runtime treats as an empty action and the reward engine
penalizes through the format reward.
"""

from __future__ import annotations

import json
import logging
import os
import random
import time
import urllib.error
import urllib.request
from dataclasses import dataclass

from .errors import TransportError, UnknownEntityError
from .miner import GoldStepRecord
from .paths import ReasoningPath, path_from, wellformed

log = logging.getLogger(__name__)

PROMPT_VERSION = 1
ACTION_SCHEMA = '{"answers": [], "exploration_paths": []}'
AUTH_TOKEN_ENV = "KGEXPLORE_POLICY_TOKEN"


@dataclass(frozen=True, slots=True)
class PolicyRequest:
    qid: str
    question: str
    depth: int
    current_paths: tuple[tuple[str, ...], ...]
    neighbors: tuple[tuple[str, str, str], ...]


@dataclass(frozen=True, slots=True)
class StepAction:
    answers: tuple[str, ...] = ()
    new_paths: tuple[ReasoningPath, ...] = ()
    stop: bool = False


EMPTY_ACTION = StepAction()


@dataclass(frozen=True, slots=True)
class RawPolicyResponse:
    text: str
    parsed: StepAction | None
    format_ok: bool
    latency_ms: float | None = None


# -- rendering and parsing ---------------------------------------------------

def render_request(req: PolicyRequest) -> str:
    """Deterministic prompt text for one batch; byte-stable for equal input."""
    lines = [
        "You are exploring a knowledge graph step by step to answer a question.",
        f"Question: {req.question}",
        "Current paths:",
    ]
    if req.current_paths:
        lines.extend("  " + " -> ".join(p) for p in req.current_paths)
    else:
        lines.append("  (none)")
    lines.append("Neighbor triples you may use to extend a current path by one hop:")
    for h, r, t in req.neighbors:
        lines.append(f"  ({h}, {r}, {t})")
    lines.extend([
        "Reply with exactly one JSON object of the form:",
        "  " + ACTION_SCHEMA,
        "answers: entities you are confident answer the question now.",
        "exploration_paths: full paths (entity, relation, entity, ...), each one",
        "being a current path extended by exactly one listed neighbor triple.",
    ])
    return "\n".join(lines)


def serialize_action(action: StepAction) -> str:
    obj = {
        "answers": list(action.answers),
        "exploration_paths": [list(p.labels) for p in action.new_paths],
    }
    if action.stop:
        obj["stop"] = True
    return json.dumps(obj, ensure_ascii=False)


def _candidate_objects(text: str):
    """Yield decoded JSON objects found at each '{' in the text, in order."""
    decoder = json.JSONDecoder()
    pos = 0
    while True:
        start = text.find("{", pos)
        if start < 0:
            return
        try:
            obj, _ = decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            pos = start + 1
            continue
        if isinstance(obj, dict):
            yield obj
        pos = start + 1


def parse_action(text: str) -> RawPolicyResponse:
    """Extract the first action object from ``text``; failures set format_ok=False."""
    for obj in _candidate_objects(text):
        answers = obj.get("answers")
        paths = obj.get("exploration_paths")
        if not isinstance(answers, list) or not isinstance(paths, list):
            continue
        if not all(isinstance(a, (str, int, float)) for a in answers):
            return RawPolicyResponse(text, None, False)
        if not all(isinstance(p, list) and wellformed(p) for p in paths):
            return RawPolicyResponse(text, None, False)
        action = StepAction(
            answers=tuple(str(a) for a in answers),
            new_paths=tuple(path_from(p) for p in paths),
            stop=bool(obj.get("stop", False)),
        )
        return RawPolicyResponse(text, action, True)
    return RawPolicyResponse(text, None, False)


# -- policies ----------------------------------------------------------------

class Policy:
    """Interface: one blocking request/response exchange per neighbor batch."""

    name = "policy"

    def act(self, req: PolicyRequest) -> RawPolicyResponse:
        raise NotImplementedError


def oracle_step(records: list[GoldStepRecord], req: PolicyRequest) -> StepAction:
    """Gold action at the request's depth, restricted to this batch.

    Restriction keeps only gold paths whose final triple is in the batch and
    gold answers reachable through a batch edge, so the union over a batch
    partition reconstructs the full gold action.
    """
    mine = [r for r in records if r.qid == req.qid]
    if not mine:
        raise UnknownEntityError(f"no mined records for qid {req.qid!r}")
    at_depth = [r for r in mine if r.depth == req.depth]
    if not at_depth:
        return EMPTY_ACTION
    rec = at_depth[0]
    batch = set(req.neighbors)
    answers = {t for (_, _, t) in batch if t in rec.gold_answers}
    paths = tuple(sorted(
        p for p in rec.gold_paths if (p.labels[-3], p.labels[-2], p.labels[-1]) in batch
    ))
    return StepAction(answers=tuple(sorted(answers)), new_paths=paths)


class OraclePolicy(Policy):
    """Replays mined gold actions; the upper-bound policy for an episode."""

    name = "oracle"

    def __init__(self, records):
        self._by_qid: dict[str, list[GoldStepRecord]] = {}
        for rec in records:
            self._by_qid.setdefault(rec.qid, []).append(rec)

    def act(self, req: PolicyRequest) -> RawPolicyResponse:
        if req.qid not in self._by_qid:
            raise UnknownEntityError(f"no mined records for qid {req.qid!r}")
        action = oracle_step(self._by_qid[req.qid], req)
        return RawPolicyResponse(serialize_action(action), action, True)


class NullPolicy(Policy):
    """Always returns an empty action; episodes end after one step."""

    name = "null"

    def act(self, req: PolicyRequest) -> RawPolicyResponse:
        return RawPolicyResponse(serialize_action(EMPTY_ACTION), EMPTY_ACTION, True)


class RandomPolicy(Policy):
    """Uniformly picks up to k batch edges that extend a current path."""

    name = "random"

    def __init__(self, k: int = 2, seed: int = 0):
        self.k = k
        self._rng = random.Random(seed)

    def act(self, req: PolicyRequest) -> RawPolicyResponse:
        current = [path_from(p) for p in req.current_paths]
        candidates = [
            p.extend(r, t)
            for p in current
            for (h, r, t) in req.neighbors
            if h == p.final
        ]
        take = min(self.k, len(candidates))
        chosen = self._rng.sample(candidates, take) if take else []
        action = StepAction(new_paths=tuple(sorted(chosen)))
        return RawPolicyResponse(serialize_action(action), action, True)


def external_step(endpoint: str, req: PolicyRequest, timeout: float = 30.0,
                  retries: int = 2) -> RawPolicyResponse:
    """POST the request to an HTTP endpoint and parse the reply text.

    Transport failures (connection errors, HTTP >= 400, timeouts) are retried
    up to ``retries`` extra attempts, then raised as TransportError.
    """
    payload = {
        "qid": req.qid,
        "question": req.question,
        "depth": req.depth,
        "current_paths": [list(p) for p in req.current_paths],
        "neighbors": [list(e) for e in req.neighbors],
        "prompt": render_request(req),
    }
    body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
    headers = {"Content-Type": "application/json"}
    token = os.environ.get(AUTH_TOKEN_ENV)
    if token:
        headers["Authorization"] = f"Bearer {token}"

    last_error: Exception | None = None
    for attempt in range(retries + 1):
        request = urllib.request.Request(endpoint, data=body, headers=headers)
        start = time.perf_counter()
        try:
            with urllib.request.urlopen(request, timeout=timeout) as resp:
                text = resp.read().decode("utf-8", errors="replace")
            latency = (time.perf_counter() - start) * 1000.0
            parsed = parse_action(text)
            return RawPolicyResponse(parsed.text, parsed.parsed, parsed.format_ok,
                                     latency_ms=latency)
        except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
            last_error = exc
            log.warning("policy endpoint %s attempt %d/%d failed: %s",
                        endpoint, attempt + 1, retries + 1, exc)
    raise TransportError(f"policy endpoint {endpoint} unreachable: {last_error}")


class ExternalPolicy(Policy):
    """Bridges to any HTTP service speaking the action protocol."""

    name = "external"

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 2):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries

    def act(self, req: PolicyRequest) -> RawPolicyResponse:
        return external_step(self.endpoint, req, timeout=self.timeout, retries=self.retries)
