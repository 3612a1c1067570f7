"""Tactic generators: ranked tactic candidates for a proof state.

These stand in for a trained language model. Each returns at most ``k``
distinct candidates sorted by descending log-probability, and asking for
fewer candidates always yields a prefix of a larger request.
"""

from __future__ import annotations

import hashlib
import json
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import NO_GOALS, ProofSearchError, TacticCandidate, parse_canonical

RANK_STEP = 0.1


class GeneratorFailure(ProofSearchError):
    pass


@dataclass(frozen=True)
class GeneratorRequest:
    state_text: str
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def rank_candidates(items: Iterable[TacticCandidate], k: int) -> list[TacticCandidate]:
    """Dedup by tactic text (keeping the best score), sort descending, truncate to k.

    The sort is stable, so equal scores keep their input order.
    """
    best: dict[str, TacticCandidate] = {}
    order: list[str] = []
    for c in items:
        if c.log_prob > 0:
            raise GeneratorFailure(f"positive log_prob {c.log_prob} for {c.text!r}")
        if c.text not in best:
            order.append(c.text)
            best[c.text] = c
        elif c.log_prob > best[c.text].log_prob:
            best[c.text] = c
    ranked = sorted((best[t] for t in order), key=lambda c: -c.log_prob)
    return ranked[:k]


class TacticGenerator(ABC):
    @abstractmethod
    def generate(self, req: GeneratorRequest) -> list[TacticCandidate]:
        ...

    def __call__(self, state_text: str, k: int) -> list[TacticCandidate]:
        return self.generate(GeneratorRequest(state_text, k))


def generate(gen: TacticGenerator, req: GeneratorRequest) -> list[TacticCandidate]:
    return gen.generate(req)


class ScriptedGenerator(TacticGenerator):
    """Looks the state text up in a fixed table."""

    def __init__(self, table: Mapping[str, Sequence], strict: bool = False):
        self.strict = strict
        self.table: dict[str, list[TacticCandidate]] = {}
        for state, cands in table.items():
            self.table[state] = [
                c if isinstance(c, TacticCandidate) else TacticCandidate(*c) for c in cands
            ]

    @classmethod
    def from_jsonl(cls, path, strict: bool = False) -> "ScriptedGenerator":
        table: dict[str, list[TacticCandidate]] = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    cands = [TacticCandidate(c["tactic"], float(c["log_prob"]))
                             for c in rec["candidates"]]
                    table.setdefault(rec["state"], []).extend(cands)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise GeneratorFailure(f"{path}:{lineno}: bad table entry ({exc})") from None
        return cls(table, strict=strict)

    def to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for state, cands in self.table.items():
                rec = {"state": state,
                       "candidates": [{"tactic": c.text, "log_prob": c.log_prob} for c in cands]}
                f.write(json.dumps(rec, ensure_ascii=False) + "\n")

    def generate(self, req: GeneratorRequest) -> list[TacticCandidate]:
        cands = self.table.get(req.state_text)
        if cands is None:
            if self.strict:
                raise GeneratorFailure(f"no scripted candidates for state:\n{req.state_text}")
            return []
        return rank_candidates(cands, req.k)


class HeuristicSimGenerator(TacticGenerator):
    """Enumerates the basic tactic grammar of the simulated environment.

    Order: ``refl``, ``assumption``, ``split``, then ``rw [h]`` for each
    hypothesis of the first goal, then ``simp [h]`` for each. The i-th
    candidate scores ``-0.1 * i``.
    """

    def generate(self, req: GeneratorRequest) -> list[TacticCandidate]:
        if req.state_text.strip() == NO_GOALS:
            return []
        goals = parse_canonical(req.state_text)
        names = [h.name for h in goals[0].hypotheses]
        texts = ["refl", "assumption", "split"]
        texts += [f"rw [{n}]" for n in names]
        texts += [f"simp [{n}]" for n in names]
        return [TacticCandidate(t, -RANK_STEP * i if i else 0.0)
                for i, t in enumerate(texts[:req.k])]


def _seeded_rng(seed: int, state_text: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}\x00{state_text}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class NoisyGenerator(TacticGenerator):
    """Wraps a generator and mixes in well-formed but inapplicable tactics.

    At each output position a seeded coin decides between the next real
    candidate and a bogus ``rw [nonexistent_j]``; ranks are renumbered
    afterwards. The coin flips depend only on (seed, state), so outputs are
    deterministic and prefix-stable in ``k``.
    """

    def __init__(self, inner: TacticGenerator, noise_rate: float = 0.5, seed: int = 0):
        if not 0.0 <= noise_rate < 1.0:
            raise ValueError("noise_rate must lie in [0, 1)")
        self.inner = inner
        self.noise_rate = noise_rate
        self.seed = seed

    def generate(self, req: GeneratorRequest) -> list[TacticCandidate]:
        real = self.inner.generate(req)
        rng = _seeded_rng(self.seed, req.state_text)
        merged: list[str] = []
        real_iter = iter(real)
        bogus = 0
        while len(merged) < req.k:
            if rng.random() < self.noise_rate:
                merged.append(f"rw [nonexistent_{bogus}]")
                bogus += 1
                continue
            nxt = next(real_iter, None)
            if nxt is None:
                break
            merged.append(nxt.text)
        return [TacticCandidate(t, -RANK_STEP * i if i else 0.0) for i, t in enumerate(merged)]


def make_generator(name: str, noise: float = 0.0, seed: int = 0,
                   strict: bool = False) -> TacticGenerator:
    """Build a generator from ``heuristic`` or ``scripted:<table.jsonl>``."""
    if name == "heuristic":
        gen: TacticGenerator = HeuristicSimGenerator()
    elif name.startswith("scripted:"):
        path = Path(name.partition(":")[2])
        if not path.exists():
            raise FileNotFoundError(f"scripted table not found: {path}")
        gen = ScriptedGenerator.from_jsonl(path, strict=strict)
    else:
        raise ValueError(f"unknown generator {name!r}")
    if noise > 0:
        gen = NoisyGenerator(gen, noise, seed)
    return gen
