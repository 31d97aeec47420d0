"""Rule-based step rewards and group-relative advantages.

Five components score one policy response against the gold record for its
depth: a format gate, recall of the step's gold answers, discovery of gold
answers beyond the step (penalizing hallucinated ones), recall of the gold
paths, and discovery of new graph-valid paths (penalizing paths using edges
absent from the graph). The total is their plain sum. Advantages normalize a
group of totals to zero mean and unit (population) variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from .evalkit import normalize_label
from .kgstore import KnowledgeGraph
from .miner import GoldStepRecord
from .paths import ReasoningPath
from .policy import RawPolicyResponse


@dataclass(frozen=True, slots=True)
class RewardConfig:
    beta: float = 1.0
    format_reward_value: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")


@dataclass(frozen=True, slots=True)
class RewardBreakdown:
    format: float
    ans: float
    ans_dis: float
    explore: float
    exp_dis: float
    total: float


@dataclass(frozen=True, slots=True)
class GroupAdvantages:
    rewards: tuple[float, ...]
    advantages: tuple[float, ...]


def _norm(labels) -> set[str]:
    return {normalize_label(a) for a in labels}


def format_reward(resp: RawPolicyResponse, cfg: RewardConfig) -> float:
    return cfg.format_reward_value if resp.format_ok else 0.0


def answer_reward(pred, gold_step) -> float:
    """Recall of the step's gold answers; vacuously 1 when none exist."""
    gold = _norm(gold_step)
    if not gold:
        return 1.0
    return len(_norm(pred) & gold) / len(gold)


def answer_discovery_reward(pred, gold_step, gold_all, cfg: RewardConfig) -> float:
    """New gold answers found minus beta per answer outside the gold set."""
    pred_n, step_n, all_n = _norm(pred), _norm(gold_step), _norm(gold_all)
    new_correct = len(pred_n & (all_n - step_n))
    hallucinated = len(pred_n - all_n)
    return new_correct - cfg.beta * hallucinated


def exploration_reward(pred_paths, gold_paths) -> float:
    """Recall of the gold path set; path identity is the exact label sequence."""
    gold = set(gold_paths)
    if not gold:
        return 1.0
    return len(set(pred_paths) & gold) / len(gold)


def _path_on_graph(g: KnowledgeGraph, p: ReasoningPath) -> bool:
    if p.hops == 0:
        return g.has_entity(p.final)
    return all(g.has_triple(h, r, t) for h, r, t in p.triples())


def exploration_discovery_reward(g: KnowledgeGraph, pred_paths, gold_paths,
                                 cfg: RewardConfig) -> float:
    """New graph-valid paths minus beta per path using a nonexistent triple.

    Paths already in the gold set contribute to neither term.
    """
    gold = set(gold_paths)
    new_valid = 0
    invalid = 0
    for p in set(pred_paths):
        if p in gold:
            continue
        if _path_on_graph(g, p):
            new_valid += 1
        else:
            invalid += 1
    return new_valid - cfg.beta * invalid


def total_reward(resp: RawPolicyResponse, record: GoldStepRecord, gold_all,
                 g: KnowledgeGraph, cfg: RewardConfig) -> RewardBreakdown:
    """Score one response against the gold record of its depth.

    Unparsable responses earn no format reward and count as empty
    predictions everywhere else.
    """
    if resp.parsed is not None:
        pred_answers = resp.parsed.answers
        pred_paths = resp.parsed.new_paths
    else:
        pred_answers, pred_paths = (), ()
    f = format_reward(resp, cfg)
    ans = answer_reward(pred_answers, record.gold_answers)
    ans_dis = answer_discovery_reward(pred_answers, record.gold_answers, gold_all, cfg)
    explore = exploration_reward(pred_paths, record.gold_paths)
    exp_dis = exploration_discovery_reward(g, pred_paths, record.gold_paths, cfg)
    return RewardBreakdown(format=f, ans=ans, ans_dis=ans_dis, explore=explore,
                           exp_dis=exp_dis, total=f + ans + ans_dis + explore + exp_dis)


def group_advantages(rewards) -> GroupAdvantages:
    """Center each reward on the group mean and scale by the population std.

    A zero-variance group (including singletons) gets all-zero advantages.
    """
    rewards = tuple(float(r) for r in rewards)
    if not rewards:
        raise ValueError("empty reward group")
    mean = fmean(rewards)
    var = fmean((r - mean) ** 2 for r in rewards)
    if var == 0.0:
        return GroupAdvantages(rewards=rewards, advantages=(0.0,) * len(rewards))
    std = var ** 0.5
    return GroupAdvantages(rewards=rewards,
                           advantages=tuple((r - mean) / std for r in rewards))
