"""Step-wise exploration episodes over a shared immutable graph.

An episode keeps the exploration state (current paths, derived frontier,
answers so far), asks a policy for an action once per neighbor batch,
validates and applies the merged action, and stops when no new paths remain,
the depth cap is hit, or a policy signals stop. Two traversal modes exist:
step_synchronous expands the whole frontier per step; depth_first walks one
accepted branch at a time under the same per-branch depth cap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .corpus import QuestionInstance
from .errors import TransportError
from .kgstore import KnowledgeGraph
from .paths import ReasoningPath
from .policy import Policy, PolicyRequest, RawPolicyResponse, StepAction

log = logging.getLogger(__name__)

MODES = ("step_synchronous", "depth_first")

TERM_EMPTY_FRONTIER = "empty_frontier"
TERM_D_MAX = "d_max"
TERM_POLICY_STOP = "policy_stop"
TERM_ERROR = "error"


@dataclass(frozen=True, slots=True)
class EpisodeConfig:
    d_max: int = 5
    batch_budget: int = 256
    mode: str = "step_synchronous"
    forbid_revisit: bool = False
    max_frontier_paths: int | None = 64

    def __post_init__(self):
        if self.d_max < 1:
            raise ValueError(f"d_max must be >= 1, got {self.d_max}")
        if self.batch_budget < 1:
            raise ValueError(f"batch_budget must be >= 1, got {self.batch_budget}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True, slots=True)
class EpisodeState:
    qid: str
    question: str
    depth: int
    current_paths: tuple[ReasoningPath, ...]
    answers_so_far: frozenset[str] = field(default_factory=frozenset)

    @property
    def frontier(self) -> frozenset[str]:
        return frozenset(p.final for p in self.current_paths)


@dataclass(frozen=True, slots=True)
class ApplyReport:
    accepted: tuple[ReasoningPath, ...]
    dropped_invalid: int
    capped: int
    format_failures: int
    stop: bool


@dataclass(frozen=True, slots=True)
class StepTrace:
    depth: int
    request_count: int
    responses: tuple[RawPolicyResponse, ...]
    predicted_answers: tuple[str, ...]
    predicted_paths: tuple[tuple[str, ...], ...]
    accepted_paths: tuple[ReasoningPath, ...]
    dropped_invalid: int
    capped: int
    answers_after: frozenset[str]


@dataclass(slots=True)
class EpisodeResult:
    answers: frozenset[str]
    trace: list[StepTrace]
    steps_taken: int
    termination: str
    error: str | None = None
    duplicate_frontier_visits: int = 0


def init_episode(g: KnowledgeGraph, q: QuestionInstance, cfg: EpisodeConfig) -> EpisodeState:
    """Depth-0 state: one singleton path per seed."""
    for s in q.seeds:
        g.entity_id(s)  # raises UnknownEntityError for bad seeds
    paths = tuple(sorted({ReasoningPath((s,)) for s in q.seeds}))
    return EpisodeState(qid=q.qid, question=q.text, depth=0, current_paths=paths)


def observe(g: KnowledgeGraph, state: EpisodeState, cfg: EpisodeConfig) -> list[PolicyRequest]:
    """Frontier neighbor edges, chunked into requests of <= batch_budget."""
    frontier_ids = sorted(g.entity_id(v) for v in state.frontier)
    edges: list[tuple[str, str, str]] = []
    for v in frontier_ids:
        edges.extend(g.triple_labels(t) for t in g.neighbors(v).edges)
    serialized_paths = tuple(p.labels for p in state.current_paths)
    requests = []
    for i in range(0, len(edges), cfg.batch_budget):
        requests.append(PolicyRequest(
            qid=state.qid, question=state.question, depth=state.depth,
            current_paths=serialized_paths,
            neighbors=tuple(edges[i:i + cfg.batch_budget]),
        ))
    return requests


def apply_action(g: KnowledgeGraph, state: EpisodeState,
                 actions: list[StepAction | None],
                 cfg: EpisodeConfig) -> tuple[EpisodeState, ApplyReport]:
    """Union the per-batch actions and advance one depth.

    Predicted paths that do not extend a current path by exactly one triple
    present in the graph are dropped and counted; answers merge as given.
    """
    current = set(state.current_paths)
    answers = set(state.answers_so_far)
    accepted: set[ReasoningPath] = set()
    dropped = 0
    format_failures = 0
    stop = False
    for action in actions:
        if action is None:
            format_failures += 1
            continue
        stop = stop or action.stop
        answers.update(action.answers)
        for p in action.new_paths:
            if p.hops < 1 or ReasoningPath(p.labels[:-2]) not in current:
                dropped += 1
                continue
            h, r, t = p.labels[-3], p.labels[-2], p.labels[-1]
            if not g.has_triple(h, r, t):
                dropped += 1
                continue
            if cfg.forbid_revisit and t in p.entities[:-1]:
                dropped += 1
                continue
            accepted.add(p)

    kept = tuple(sorted(accepted))
    capped = 0
    if cfg.max_frontier_paths is not None and len(kept) > cfg.max_frontier_paths:
        capped = len(kept) - cfg.max_frontier_paths
        kept = kept[:cfg.max_frontier_paths]

    new_state = EpisodeState(qid=state.qid, question=state.question,
                             depth=state.depth + 1, current_paths=kept,
                             answers_so_far=frozenset(answers))
    return new_state, ApplyReport(accepted=kept, dropped_invalid=dropped,
                                  capped=capped, format_failures=format_failures,
                                  stop=stop)


def _collect(responses: list[RawPolicyResponse]):
    actions = [r.parsed for r in responses]
    pred_answers = tuple(sorted({a for r in responses if r.parsed for a in r.parsed.answers}))
    pred_paths = tuple(sorted({p.labels for r in responses if r.parsed
                               for p in r.parsed.new_paths}))
    return actions, pred_answers, pred_paths


def run_episode(g: KnowledgeGraph, q: QuestionInstance, policy: Policy,
                cfg: EpisodeConfig) -> EpisodeResult:
    if cfg.mode == "depth_first":
        return _run_depth_first(g, q, policy, cfg)
    return _run_synchronous(g, q, policy, cfg)


def _run_synchronous(g: KnowledgeGraph, q: QuestionInstance, policy: Policy,
                     cfg: EpisodeConfig) -> EpisodeResult:
    state = init_episode(g, q, cfg)
    trace: list[StepTrace] = []
    termination = TERM_D_MAX
    error = None
    steps = 0
    while state.depth < cfg.d_max:
        requests = observe(g, state, cfg)
        try:
            responses = [policy.act(req) for req in requests]
        except TransportError as exc:
            termination, error = TERM_ERROR, str(exc)
            break
        actions, pred_answers, pred_paths = _collect(responses)
        state, report = apply_action(g, state, actions, cfg)
        steps += 1
        trace.append(StepTrace(
            depth=state.depth - 1, request_count=len(requests),
            responses=tuple(responses), predicted_answers=pred_answers,
            predicted_paths=pred_paths, accepted_paths=report.accepted,
            dropped_invalid=report.dropped_invalid, capped=report.capped,
            answers_after=state.answers_so_far,
        ))
        if report.stop:
            termination = TERM_POLICY_STOP
            break
        if not state.current_paths:
            termination = TERM_EMPTY_FRONTIER
            break
    return EpisodeResult(answers=state.answers_so_far, trace=trace,
                         steps_taken=steps, termination=termination, error=error)


def _run_depth_first(g: KnowledgeGraph, q: QuestionInstance, policy: Policy,
                     cfg: EpisodeConfig) -> EpisodeResult:
    """One branch at a time: LIFO over accepted paths, same per-branch cap."""
    root = init_episode(g, q, cfg)
    stack: list[ReasoningPath] = list(reversed(root.current_paths))
    answers: set[str] = set()
    trace: list[StepTrace] = []
    seen_frontiers: set[str] = set()
    duplicates = 0
    cap_hit = False
    stopped = False
    error = None
    steps = 0

    while stack:
        path = stack.pop()
        if path.final in seen_frontiers:
            duplicates += 1
        seen_frontiers.add(path.final)
        branch_state = EpisodeState(qid=q.qid, question=q.text, depth=path.hops,
                                    current_paths=(path,),
                                    answers_so_far=frozenset(answers))
        requests = observe(g, branch_state, cfg)
        try:
            responses = [policy.act(req) for req in requests]
        except TransportError as exc:
            error = str(exc)
            break
        actions, pred_answers, pred_paths = _collect(responses)
        new_state, report = apply_action(g, branch_state, actions, cfg)
        steps += 1
        answers.update(new_state.answers_so_far)
        trace.append(StepTrace(
            depth=path.hops, request_count=len(requests),
            responses=tuple(responses), predicted_answers=pred_answers,
            predicted_paths=pred_paths, accepted_paths=report.accepted,
            dropped_invalid=report.dropped_invalid, capped=report.capped,
            answers_after=frozenset(answers),
        ))
        if report.stop:
            stopped = True
            break
        for ext in reversed(report.accepted):
            if ext.hops >= cfg.d_max:
                cap_hit = True
            else:
                stack.append(ext)

    if error is not None:
        termination = TERM_ERROR
    elif stopped:
        termination = TERM_POLICY_STOP
    elif cap_hit:
        termination = TERM_D_MAX
    else:
        termination = TERM_EMPTY_FRONTIER
    return EpisodeResult(answers=frozenset(answers), trace=trace, steps_taken=steps,
                         termination=termination, error=error,
                         duplicate_frontier_visits=duplicates)
