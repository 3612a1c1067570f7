"""Best-first proof search with a time-dependent expansion width."""

from __future__ import annotations

import json
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, TextIO

from .core import (
    EnvError,
    Frontier,
    NodeStore,
    ProofResult,
    ProofSearchError,
    Proved,
    QueueExhausted,
    SearchNode,
    SearchStats,
    TheoremSpec,
    Timeout,
    extract_proof,
)
from .env.base import DEFAULT_TACTIC_TIMEOUT, ProverEnv, TacticTimeout
from .generator import GeneratorRequest, TacticGenerator
from .schedule import (
    DEFAULT_OVERSAMPLE,
    DynamicScheduleConfig,
    ScheduleConfig,
    TimeBudget,
    elapsed_ratio,
    request_size,
    sample_count,
)

DEFAULT_TOTAL_TIME = 600.0


class SearchCancelled(ProofSearchError):
    pass


def clamp_tactic_timeout(total_time: float, requested: float = DEFAULT_TACTIC_TIMEOUT) -> float:
    """Per-tactic timeout that stays strictly below the search budget."""
    return requested if requested < total_time else total_time / 2


@dataclass(frozen=True)
class SearchConfig:
    schedule: ScheduleConfig = field(default_factory=DynamicScheduleConfig)
    total_time: float = DEFAULT_TOTAL_TIME
    per_tactic_timeout: float = DEFAULT_TACTIC_TIMEOUT
    oversample_factor: int = DEFAULT_OVERSAMPLE
    max_nodes: int | None = None
    dedup: bool = True

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if not 0 < self.per_tactic_timeout < self.total_time:
            raise ValueError(
                f"per_tactic_timeout ({self.per_tactic_timeout}s) must be below "
                f"the search budget ({self.total_time}s)"
            )
        if self.oversample_factor < 1:
            raise ValueError("oversample_factor must be >= 1")
        if self.max_nodes is not None and self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")


class EventLog:
    """Collects search events; optionally mirrors them to a JSONL stream."""

    def __init__(self, stream: TextIO | None = None, keep: bool = True):
        self.stream = stream
        self.keep = keep
        self.records: list[dict] = []

    def __call__(self, record: dict) -> None:
        if self.keep:
            self.records.append(record)
        if self.stream is not None:
            self.stream.write(json.dumps(record, ensure_ascii=False) + "\n")


class Search:
    """State of one best-first search; use :func:`prove` for the common case."""

    def __init__(self, env: ProverEnv, gen: TacticGenerator, cfg: SearchConfig,
                 events: Callable[[dict], None] | None = None,
                 cancel: threading.Event | None = None,
                 clock: Callable[[], float] = time.monotonic):
        self.env = env
        self.gen = gen
        self.cfg = cfg
        self.events = events
        self.cancel = cancel
        self.clock = clock
        self.store = NodeStore()
        self.frontier = Frontier()
        self.seen: set[str] = set()
        self.stats = SearchStats()
        self.budget: TimeBudget | None = None

    def _emit(self, kind: str, **fields) -> None:
        if self.events is not None:
            self.events({"event": kind, "t": self.clock() - self.budget.started_at, **fields})

    def _check_cancel(self) -> None:
        if self.cancel is not None and self.cancel.is_set():
            raise SearchCancelled("search cancelled")

    def _push(self, node: SearchNode) -> None:
        self.frontier.push(node)
        self._emit("push", node=node.id, priority=node.cum_log_prob, depth=node.depth,
                   parent=node.parent[0] if node.parent else None)

    def run(self, spec: TheoremSpec) -> ProofResult:
        self.budget = TimeBudget(self.cfg.total_time, self.clock())
        try:
            root_state = self.env.init(spec)
        except ProofSearchError as exc:
            return EnvError(str(exc))
        root = self.store.add_root(root_state)
        self.stats.count_node(0)
        self.seen.add(root_state.canonical_text)
        self._push(root)
        try:
            return self._loop()
        except SearchCancelled:
            raise
        except ProofSearchError as exc:
            return EnvError(str(exc))

    def _elapsed(self) -> float:
        return self.budget.elapsed(self.clock())

    def _loop(self) -> ProofResult:
        while True:
            self._check_cancel()
            if self.budget.expired(self.clock()):
                self._emit("timeout")
                return Timeout(len(self.store), self._elapsed())
            node = self.frontier.pop()
            if node is None:
                self._emit("exhausted")
                return QueueExhausted(len(self.store), self._elapsed())
            self._emit("pop", node=node.id, priority=node.cum_log_prob, depth=node.depth)
            if node.state.proved:
                tactics = extract_proof(self.store, node.id)
                self.stats.proof_size = len(tactics)
                self._emit("proved", node=node.id, size=len(tactics))
                return Proved(tuple(tactics), len(self.store), self._elapsed())
            for child in self.expand(node):
                self._push(child)

    def expand(self, node: SearchNode) -> list[SearchNode]:
        """Apply generated tactics to ``node`` and return the new children.

        The number of children kept follows the schedule at the current
        elapsed ratio; under the dynamic schedule the generator is asked for
        ``oversample_factor`` times that many candidates.
        """
        cfg = self.cfg
        r = elapsed_ratio(self.budget, self.clock())
        n = sample_count(cfg.schedule, r)
        k = request_size(cfg.schedule, n, cfg.oversample_factor)
        capped = isinstance(cfg.schedule, DynamicScheduleConfig)
        self.stats.expansions += 1
        self.stats.schedule_trace.append((r, n))
        self._emit("expand", node=node.id, r=r, n=n, requested=k)

        candidates = self.gen.generate(GeneratorRequest(node.state.canonical_text, k))[:k]
        self.stats.tactics_sampled += len(candidates)
        children: list[SearchNode] = []
        for cand in candidates:
            if capped and len(children) >= n:
                break
            self._check_cancel()
            if self.budget.expired(self.clock()):
                break
            if cfg.max_nodes is not None and len(self.store) >= cfg.max_nodes:
                break
            outcome = self.env.run_tactic(node.state, cand.text, cfg.per_tactic_timeout)
            if not outcome.ok:
                if isinstance(outcome, TacticTimeout):
                    self.stats.tactic_timeouts += 1
                else:
                    self.stats.tactic_errors += 1
                self._emit("apply", node=node.id, tactic=cand.text, outcome="failed")
                continue
            self.stats.tactics_succeeded += 1
            key = outcome.state.canonical_text
            if cfg.dedup and key in self.seen:
                self.stats.duplicates += 1
                self._emit("apply", node=node.id, tactic=cand.text, outcome="duplicate")
                continue
            self.seen.add(key)
            child = self.store.add_child(node, cand.text, cand.log_prob, outcome.state)
            self.stats.count_node(child.depth)
            self._emit("apply", node=node.id, tactic=cand.text, outcome="child", child=child.id)
            children.append(child)
        return children


def prove(spec: TheoremSpec, env: ProverEnv, gen: TacticGenerator,
          cfg: SearchConfig | None = None, *,
          events: Callable[[dict], None] | None = None,
          cancel: threading.Event | None = None) -> tuple[ProofResult, SearchStats]:
    """Run one best-first search for ``spec``.

    Returns Proved, Timeout, QueueExhausted or EnvError together with the
    search statistics. Raises SearchCancelled if ``cancel`` gets set.
    """
    search = Search(env, gen, cfg or SearchConfig(), events=events, cancel=cancel)
    result = search.run(spec)
    return result, search.stats


def depth_histogram(stats: SearchStats) -> dict[int, int]:
    return dict(sorted(stats.nodes_per_depth.items()))


def average_depth_histogram(stats_list: Iterable[SearchStats]) -> dict[int, float]:
    """Mean number of nodes at each depth over several searches."""
    stats_list = list(stats_list)
    if not stats_list:
        return {}
    total: Counter = Counter()
    for s in stats_list:
        total.update(s.nodes_per_depth)
    return {d: total[d] / len(stats_list) for d in sorted(total)}


def proof_size_report(results: Iterable[tuple[ProofResult, SearchStats]]) -> dict[int, int]:
    sizes = Counter(len(r.tactics) for r, _ in results if isinstance(r, Proved))
    return dict(sorted(sizes.items()))
