"""Command-line pipeline: build-kg, mine, export-sft, explore, score, eval, split.

Configuration resolves defaults <- config file <- flags (rightmost wins) and
the resolved values are echoed to the log so any run can be reproduced. All
outputs are JSONL/JSON written deterministically: re-running a subcommand on
identical inputs with the same seeds rewrites byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

from . import _kernels, corpus, evalkit, miner, rewards, runtime
from . import policy as policy_mod
from .errors import ConfigError, KGExploreError
from .kgstore import build_graph, load_triples_tsv

log = logging.getLogger("kgexplore")


@dataclass
class RunConfig:
    kg_path: str | None = None
    questions_path: str | None = None
    output_path: str | None = None
    l_max: int = 2
    d_max: int = 5
    batch_budget: int = 256
    neighbor_cap: int = 256
    beta: float = 1.0
    format_reward_value: float = 1.0
    split_seed: int = 1
    mode: str = "step_synchronous"
    policy_spec: str = "null"

    def validate(self):
        for key in ("l_max", "d_max", "batch_budget", "neighbor_cap"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1, got {getattr(self, key)}")
        if self.beta < 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if self.split_seed < 0:
            raise ConfigError(f"split_seed must be >= 0, got {self.split_seed}")
        if self.mode not in runtime.MODES:
            raise ConfigError(f"mode must be one of {runtime.MODES}, got {self.mode!r}")


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Flat `key = value` file under CLI flags; unknown keys are errors."""
    cfg = RunConfig()
    known = {f.name: f.type for f in fields(RunConfig)}
    if path:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key not in known:
                    raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
                try:
                    setattr(cfg, key, _coerce(getattr(cfg, key), value, key))
                except ValueError as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from None
    for key, value in overrides.items():
        if value is not None:
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    cfg.validate()
    log.info("config: %s", json.dumps(asdict(cfg), sort_keys=True))
    return cfg


def _coerce(default, raw: str, key: str):
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"key {key!r}: not an integer: {raw!r}") from None
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"key {key!r}: not a number: {raw!r}") from None
    return raw


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _map_ordered(fn, items, jobs: int):
    """Apply fn across items, preserving input order in the results."""
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _load_graph(args):
    triples = load_triples_tsv(args.kg)
    g = build_graph(triples, augment=not args.no_augment,
                    inverse_suffix=getattr(args, "inverse_suffix", ".inv"))
    log.info("graph: %d entities, %d relations, %d edges (backend=%s)",
             g.n_entities, g.n_relations, g.n_edges, _kernels.BACKEND)
    return g


# -- subcommands --------------------------------------------------------------

def cmd_build_kg(args) -> int:
    g = _load_graph(args)
    stats = {"entities": g.n_entities, "relations": g.n_relations,
             "edges": g.n_edges, "augmented": g.augmented}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(_dump(stats) + "\n")
    else:
        print(_dump(stats))
    return 0


def cmd_mine(args) -> int:
    cfg = load_config(args.config, {"l_max": args.lmax, "neighbor_cap": args.neighbor_cap})
    g = _load_graph(args)
    questions = corpus.load_questions(args.questions, g, strict=args.strict_seeds)

    def one(q):
        t0 = time.perf_counter()
        gold, records = miner.mine_question(g, q, cfg.l_max, neighbor_cap=cfg.neighbor_cap)
        log.info("mined qid=%s gold_paths=%d records=%d ms=%.1f",
                 q.qid, len(gold), len(records), (time.perf_counter() - t0) * 1000)
        return records

    all_records = [r for recs in _map_ordered(one, questions, args.jobs) for r in recs]
    n = miner.export_sft_dataset(all_records, args.out, l_max=cfg.l_max,
                                 neighbor_cap=cfg.neighbor_cap)
    log.info("wrote %d step records to %s", n, args.out)
    return 0


def cmd_export_sft(args) -> int:
    header, records = miner.import_sft_dataset(args.records)
    cap = args.neighbor_cap or header["neighbor_cap"]
    if cap < header["neighbor_cap"]:
        records = [
            miner.GoldStepRecord(
                qid=r.qid, depth=r.depth, question=r.question,
                current_paths=r.current_paths,
                frontier_neighbors=tuple(
                    miner.NeighborRow(center=row.center, edges=row.edges[:cap])
                    for row in r.frontier_neighbors),
                gold_answers=r.gold_answers, gold_paths=r.gold_paths,
                seed_answers=r.seed_answers)
            for r in records
        ]
    n = miner.export_sft_dataset(records, args.out, l_max=header["l_max"], neighbor_cap=cap)
    log.info("re-exported %d records to %s", n, args.out)
    return 0


def _make_policy_factory(args, records):
    spec = args.policy
    if spec == "oracle":
        shared = policy_mod.OraclePolicy(records)
        return lambda q: shared
    if spec == "null":
        shared = policy_mod.NullPolicy()
        return lambda q: shared
    if spec == "random" or spec.startswith("random:"):
        k = int(spec.split(":", 1)[1]) if ":" in spec else 2
        return lambda q: policy_mod.RandomPolicy(k=k, seed=args.policy_seed)
    if spec.startswith("external:"):
        shared = policy_mod.ExternalPolicy(spec.split(":", 1)[1],
                                           timeout=args.policy_timeout,
                                           retries=args.policy_retries)
        return lambda q: shared
    raise ConfigError(f"unknown policy spec {spec!r}")


def _trace_lines(qid: str, result: runtime.EpisodeResult) -> list[str]:
    lines = []
    for step in result.trace:
        lines.append(_dump({
            "qid": qid,
            "depth": step.depth,
            "request_count": step.request_count,
            "responses": [
                {"text": r.text, "format_ok": r.format_ok, "latency_ms": r.latency_ms}
                for r in step.responses
            ],
            "action": {
                "answers": list(step.predicted_answers),
                "exploration_paths": [list(p) for p in step.predicted_paths],
            },
            "accepted_paths": sorted(list(p.labels) for p in step.accepted_paths),
            "dropped_paths": step.dropped_invalid,
            "capped": step.capped,
            "answers": sorted(step.answers_after),
        }))
    return lines


def cmd_explore(args) -> int:
    cfg = load_config(args.config, {
        "d_max": args.dmax, "batch_budget": args.batch_budget,
        "mode": args.mode, "policy_spec": args.policy,
    })
    args.policy = cfg.policy_spec
    g = _load_graph(args)
    questions = corpus.load_questions(args.questions, g, strict=args.strict_seeds)
    records = []
    if cfg.policy_spec == "oracle":
        if not args.sft:
            raise ConfigError("--policy oracle requires --sft <records.jsonl>")
        records = miner.import_sft_dataset(args.sft)[1]
    factory = _make_policy_factory(args, records)
    fanout = args.max_frontier_paths if args.max_frontier_paths > 0 else None
    ep_cfg = runtime.EpisodeConfig(
        d_max=cfg.d_max, batch_budget=cfg.batch_budget, mode=cfg.mode,
        forbid_revisit=args.forbid_revisit,
        max_frontier_paths=fanout,
    )

    def one(q):
        t0 = time.perf_counter()
        result = runtime.run_episode(g, q, factory(q), ep_cfg)
        log.info("explored qid=%s steps=%d answers=%d termination=%s ms=%.1f",
                 q.qid, result.steps_taken, len(result.answers), result.termination,
                 (time.perf_counter() - t0) * 1000)
        return result

    results = _map_ordered(one, questions, args.jobs)
    with open(args.out, "w", encoding="utf-8") as fh:
        for q, result in zip(questions, results):
            for line in _trace_lines(q.qid, result):
                fh.write(line + "\n")
    if args.pred_out:
        with open(args.pred_out, "w", encoding="utf-8") as fh:
            for q, result in zip(questions, results):
                fh.write(_dump({"qid": q.qid, "answers": sorted(result.answers),
                                "steps": result.steps_taken,
                                "termination": result.termination}) + "\n")
    return 0


def cmd_score(args) -> int:
    cfg = load_config(args.config, {"beta": args.beta,
                                    "format_reward_value": args.format_reward_value})
    g = _load_graph(args)
    questions = {q.qid: q for q in corpus.load_questions(args.questions, g, strict=False)}
    gold = {}
    for rec in miner.import_sft_dataset(args.gold)[1]:
        gold[(rec.qid, rec.depth)] = rec
    rcfg = rewards.RewardConfig(beta=cfg.beta, format_reward_value=cfg.format_reward_value)

    skipped = 0
    episode_totals: dict[str, float] = {}
    out_lines: list[str] = []
    with open(args.trace, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            step = json.loads(line)
            key = (step["qid"], step["depth"])
            if key not in gold or step["qid"] not in questions:
                skipped += 1
                continue
            record = gold[key]
            gold_all = questions[step["qid"]].answers
            for i, resp in enumerate(step["responses"]):
                parsed = policy_mod.parse_action(resp["text"])
                bd = rewards.total_reward(parsed, record, gold_all, g, rcfg)
                episode_totals[step["qid"]] = episode_totals.get(step["qid"], 0.0) + bd.total
                out_lines.append(_dump({
                    "qid": step["qid"], "depth": step["depth"], "sample_index": i,
                    "format": bd.format, "ans": bd.ans, "ans_dis": bd.ans_dis,
                    "explore": bd.explore, "exp_dis": bd.exp_dis, "total": bd.total,
                }))
    with open(args.out, "w", encoding="utf-8") as fh:
        for line in out_lines:
            fh.write(line + "\n")
        for qid in sorted(episode_totals):
            fh.write(_dump({"qid": qid, "episode_total": episode_totals[qid]}) + "\n")
    if skipped:
        log.warning("skipped %d trace step(s) without a matching gold record", skipped)
    return 0


def cmd_eval(args) -> int:
    g = _load_graph(args) if args.kg else None
    questions = corpus.load_questions(args.questions, g, strict=False)
    excluded = sum(1 for q in questions if not q.answers)
    scored_questions = [q for q in questions if q.answers]

    scores = []
    if args.khop:
        if g is None:
            raise ConfigError("--khop requires --kg")
        for q in scored_questions:
            retrieved = evalkit.retrieve_khop(g, q.seed_ids, args.khop)
            hit, recall, precision = evalkit.retrieval_metrics(g, retrieved, q.answers)
            f1 = (2 * precision * recall / (precision + recall)
                  if precision + recall > 0 else 0.0)
            hit_ub, recall_ub = evalkit.answer_upper_bounds(q.answers, g)
            scores.append(evalkit.QuestionScore(
                qid=q.qid, hit=hit, precision=precision, recall=recall, f1=f1,
                hit_ub=hit_ub, recall_ub=recall_ub))
    else:
        if not args.pred:
            raise ConfigError("eval needs --pred or --khop")
        preds = {}
        with open(args.pred, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    obj = json.loads(line)
                    preds[str(obj["qid"])] = [str(a) for a in obj["answers"]]
        for q in scored_questions:
            scores.append(evalkit.answer_metrics(preds.get(q.qid, ()), q.answers,
                                                 qid=q.qid, g=g))

    report = evalkit.aggregate_report(scores).to_dict()
    report["excluded_empty_gold"] = excluded
    text = _dump(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_split(args) -> int:
    cfg = load_config(args.config, {"split_seed": args.seed})
    with open(args.questions, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    n = len(lines)
    n_a = int(args.ratio * n + 0.5)
    order = list(range(n))
    random.Random(cfg.split_seed).shuffle(order)
    chosen = set(order[:n_a])
    with open(args.out_a, "w", encoding="utf-8") as fh:
        for i, ln in enumerate(lines):
            if i in chosen:
                fh.write(ln + "\n")
    with open(args.out_b, "w", encoding="utf-8") as fh:
        for i, ln in enumerate(lines):
            if i not in chosen:
                fh.write(ln + "\n")
    log.info("split %d questions into %d/%d (ratio=%.2f seed=%d)",
             n, n_a, n - n_a, args.ratio, cfg.split_seed)
    return 0


# -- parser -------------------------------------------------------------------

def _add_common(p, kg=False, questions=False, jobs=False):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("-v", "--verbose", action="store_true")
    if kg:
        p.add_argument("--kg", required=True, help="triples TSV (head<TAB>relation<TAB>tail)")
        p.add_argument("--no-augment", action="store_true",
                       help="skip inverse-edge augmentation")
        p.add_argument("--inverse-suffix", default=".inv")
    if questions:
        p.add_argument("--questions", required=True, help="questions JSONL")
        p.add_argument("--strict-seeds", action="store_true",
                       help="reject records with unresolved seeds instead of dropping them")
    if jobs:
        p.add_argument("--jobs", type=int, default=1, help="per-question parallelism")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgexplore",
                                     description="knowledge-graph exploration toolkit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("build-kg", help="load a TSV graph and report stats")
    _add_common(p, kg=True)
    p.add_argument("--out", help="stats JSON path (default: stdout)")
    p.set_defaults(fn=cmd_build_kg)

    p = sub.add_parser("mine", help="mine gold paths and export step records")
    _add_common(p, kg=True, questions=True, jobs=True)
    p.add_argument("--lmax", type=int, required=True, help="maximum gold path hops")
    p.add_argument("--neighbor-cap", type=int, help="per-node neighbor cap in records")
    p.add_argument("--out", required=True, help="output SFT JSONL")
    p.set_defaults(fn=cmd_mine)

    p = sub.add_parser("export-sft", help="validate and re-export an SFT dataset")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--records", required=True, help="input SFT JSONL")
    p.add_argument("--neighbor-cap", type=int, help="shrink per-node neighbor rows")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export_sft)

    p = sub.add_parser("explore", help="run exploration episodes with a policy")
    _add_common(p, kg=True, questions=True, jobs=True)
    p.add_argument("--policy", help="oracle | null | random[:k] | external:<url>")
    p.add_argument("--sft", help="mined records JSONL (oracle policy)")
    p.add_argument("--dmax", type=int)
    p.add_argument("--batch-budget", type=int)
    p.add_argument("--mode", choices=runtime.MODES)
    p.add_argument("--forbid-revisit", action="store_true")
    p.add_argument("--max-frontier-paths", type=int, default=64,
                   help="fan-out guard on accepted paths per step; 0 disables")
    p.add_argument("--policy-seed", type=int, default=0)
    p.add_argument("--policy-timeout", type=float, default=30.0)
    p.add_argument("--policy-retries", type=int, default=2)
    p.add_argument("--out", required=True, help="trace JSONL")
    p.add_argument("--pred-out", help="per-question predicted answers JSONL")
    p.set_defaults(fn=cmd_explore)

    p = sub.add_parser("score", help="reward a trace against mined gold records")
    _add_common(p, kg=True, questions=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--gold", required=True, help="mined SFT JSONL")
    p.add_argument("--beta", type=float)
    p.add_argument("--format-reward-value", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("eval", help="answer metrics or the k-hop baseline")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--pred", help="predictions JSONL {qid, answers}")
    p.add_argument("--questions", required=True)
    p.add_argument("--kg", help="triples TSV (enables upper bounds and --khop)")
    p.add_argument("--no-augment", action="store_true")
    p.add_argument("--inverse-suffix", default=".inv")
    p.add_argument("--khop", type=int, help="score the k-hop retriever instead of --pred")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("split", help="seeded partition of a question file")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--questions", required=True)
    p.add_argument("--ratio", type=float, default=0.6)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-a", required=True)
    p.add_argument("--out-b", required=True)
    p.set_defaults(fn=cmd_split)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except KGExploreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
