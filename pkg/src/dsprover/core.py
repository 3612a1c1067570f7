"""Domain types shared by the environments, generators and the search engine."""

from __future__ import annotations

import heapq
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

IDENT_RE = re.compile(r"[^\W\d][\w.']*\Z")

NO_GOALS = "no goals"
TURNSTILE = "|- "


class ProofSearchError(Exception):
    """Base class for errors raised by this package."""


class ProverError(ProofSearchError):
    """The prover environment rejected a theorem or failed fatally."""


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text))


@dataclass(frozen=True)
class Hypothesis:
    name: str
    statement: str

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ValueError(f"invalid hypothesis name {self.name!r}")
        if not self.statement.strip():
            raise ValueError(f"hypothesis {self.name} has an empty statement")

    def render(self) -> str:
        return f"{self.name}: {self.statement}"


@dataclass(frozen=True)
class Goal:
    hypotheses: tuple[Hypothesis, ...]
    target: str

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        names = [h.name for h in self.hypotheses]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate hypothesis names in goal: {names}")
        if not self.target.strip():
            raise ValueError("goal target is empty")

    def hypothesis(self, name: str) -> Hypothesis | None:
        for h in self.hypotheses:
            if h.name == name:
                return h
        return None

    def render(self) -> str:
        lines = [h.render() for h in self.hypotheses]
        lines.append(TURNSTILE + self.target)
        return "\n".join(lines)


def canonicalize_state(goals: Iterable[Goal]) -> str:
    """Render goals in the layout used for dedup keys and generator input.

    One ``name: statement`` line per hypothesis, then ``|- target``; goals are
    separated by a blank line. An empty goal list renders as ``no goals``.
    """
    rendered = [g.render() for g in goals]
    if not rendered:
        return NO_GOALS
    return "\n\n".join(rendered)


def parse_canonical(text: str) -> tuple[Goal, ...]:
    """Inverse of :func:`canonicalize_state`."""
    text = text.strip("\n")
    if text == NO_GOALS:
        return ()
    goals = []
    for block in text.split("\n\n"):
        hyps = []
        target = None
        for line in block.split("\n"):
            if line.startswith(TURNSTILE) or line == TURNSTILE.strip():
                if target is not None:
                    raise ValueError("goal block has two targets")
                target = line[len(TURNSTILE):]
            else:
                name, sep, stmt = line.partition(": ")
                if not sep or target is not None:
                    raise ValueError(f"cannot parse hypothesis line {line!r}")
                hyps.append(Hypothesis(name.strip(), stmt.strip()))
        if target is None:
            raise ValueError(f"goal block without target: {block!r}")
        goals.append(Goal(tuple(hyps), target))
    return tuple(goals)


@dataclass(frozen=True)
class ProofState:
    goals: tuple[Goal, ...]
    canonical_text: str = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "goals", tuple(self.goals))
        object.__setattr__(self, "canonical_text", canonicalize_state(self.goals))

    @property
    def proved(self) -> bool:
        return not self.goals

    @classmethod
    def from_text(cls, text: str) -> "ProofState":
        return cls(parse_canonical(text))

    def __str__(self):
        return self.canonical_text


@dataclass(frozen=True)
class TheoremSpec:
    name: str
    hypotheses: tuple[Hypothesis, ...]
    target: str

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))

    @classmethod
    def from_dict(cls, data: Mapping) -> "TheoremSpec":
        try:
            name = data["name"]
            target = data["target"]
            hyps = tuple(
                Hypothesis(h["name"], h["statement"]) for h in data.get("hypotheses", [])
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed theorem spec: missing {exc}") from None
        if not isinstance(name, str) or not name:
            raise ValueError("theorem name must be a non-empty string")
        if not isinstance(target, str) or not target.strip():
            raise ValueError("theorem target must be a non-empty string")
        return cls(name, hyps, target)

    @classmethod
    def from_state_text(cls, name: str, text: str) -> "TheoremSpec":
        goals = parse_canonical(text)
        if len(goals) != 1:
            raise ValueError("a theorem's initial state must have exactly one goal")
        return cls(name, goals[0].hypotheses, goals[0].target)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "hypotheses": [{"name": h.name, "statement": h.statement} for h in self.hypotheses],
            "target": self.target,
        }


@dataclass(frozen=True)
class TacticCandidate:
    text: str
    log_prob: float

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("tactic text is empty")
        if self.log_prob > 0:
            raise ValueError(f"log_prob must be <= 0, got {self.log_prob} for {self.text!r}")


@dataclass(frozen=True)
class SearchNode:
    id: int
    state: ProofState
    cum_log_prob: float
    depth: int
    parent: tuple[int, str] | None
    insertion_seq: int

    def priority_key(self):
        # heapq is a min-heap
        return (-self.cum_log_prob, self.depth, self.insertion_seq)


class Frontier:
    """Max-priority queue over search nodes.

    Pops the node with the highest cumulative log-probability; ties go to the
    shallower node, then to the earlier insertion.
    """

    def __init__(self):
        self._heap: list = []
        self._ids: set[int] = set()

    def push(self, node: SearchNode) -> None:
        if node.id in self._ids:
            raise ValueError(f"node {node.id} already in frontier")
        self._ids.add(node.id)
        heapq.heappush(self._heap, (node.priority_key(), node.id, node))

    def pop(self) -> SearchNode | None:
        if not self._heap:
            return None
        _, _, node = heapq.heappop(self._heap)
        self._ids.discard(node.id)
        return node

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._ids


def frontier_push(frontier: Frontier, node: SearchNode) -> None:
    frontier.push(node)


def frontier_pop(frontier: Frontier) -> SearchNode | None:
    return frontier.pop()


class NodeStore:
    """Owns every node created during one search."""

    def __init__(self):
        self.nodes: dict[int, SearchNode] = {}
        self._ids = itertools.count()
        self._seq = itertools.count()

    def add_root(self, state: ProofState) -> SearchNode:
        node = SearchNode(next(self._ids), state, 0.0, 0, None, next(self._seq))
        self.nodes[node.id] = node
        return node

    def add_child(self, parent: SearchNode, tactic: str, log_prob: float,
                  state: ProofState) -> SearchNode:
        node = SearchNode(
            next(self._ids),
            state,
            parent.cum_log_prob + log_prob,
            parent.depth + 1,
            (parent.id, tactic),
            next(self._seq),
        )
        self.nodes[node.id] = node
        return node

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, node_id: int) -> SearchNode:
        return self.nodes[node_id]

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.nodes


def extract_proof(nodes: Union[NodeStore, Mapping[int, SearchNode]], proved_id: int) -> list[str]:
    """Tactics along the parent edges from the root to ``proved_id``, root first."""
    if proved_id not in nodes:
        raise KeyError(f"unknown node {proved_id}")
    node = nodes[proved_id]
    if not node.state.proved:
        raise ValueError(f"node {proved_id} still has open goals")
    tactics = []
    while node.parent is not None:
        parent_id, tactic = node.parent
        tactics.append(tactic)
        node = nodes[parent_id]
    tactics.reverse()
    return tactics


# Results


@dataclass(frozen=True)
class Proved:
    tactics: tuple[str, ...]
    node_count: int
    elapsed: float
    status = "proved"


@dataclass(frozen=True)
class Timeout:
    node_count: int
    elapsed: float
    status = "timeout"


@dataclass(frozen=True)
class QueueExhausted:
    node_count: int
    elapsed: float
    status = "exhausted"


@dataclass(frozen=True)
class EnvError:
    message: str
    status = "error"


ProofResult = Union[Proved, Timeout, QueueExhausted, EnvError]


def result_to_dict(result: ProofResult) -> dict:
    out: dict = {"status": result.status}
    if isinstance(result, Proved):
        out["proof"] = list(result.tactics)
    if isinstance(result, EnvError):
        out["error"] = result.message
    else:
        out["node_count"] = result.node_count
        out["elapsed_s"] = result.elapsed
    return out


@dataclass
class SearchStats:
    nodes_per_depth: dict[int, int] = field(default_factory=dict)
    expansions: int = 0
    tactics_sampled: int = 0
    tactics_succeeded: int = 0
    tactic_errors: int = 0
    tactic_timeouts: int = 0
    duplicates: int = 0
    proof_size: int | None = None
    # (elapsed ratio, scheduled count) for each expansion, in order
    schedule_trace: list[tuple[float, int]] = field(default_factory=list)

    @property
    def total_nodes(self) -> int:
        return sum(self.nodes_per_depth.values())

    def count_node(self, depth: int) -> None:
        self.nodes_per_depth[depth] = self.nodes_per_depth.get(depth, 0) + 1

    def to_dict(self) -> dict:
        return {
            "nodes_per_depth": {str(k): v for k, v in sorted(self.nodes_per_depth.items())},
            "expansions": self.expansions,
            "tactics_sampled": self.tactics_sampled,
            "tactics_succeeded": self.tactics_succeeded,
            "tactic_errors": self.tactic_errors,
            "tactic_timeouts": self.tactic_timeouts,
            "duplicates": self.duplicates,
            "proof_size": self.proof_size,
            "schedule_trace": [[r, n] for r, n in self.schedule_trace],
        }

