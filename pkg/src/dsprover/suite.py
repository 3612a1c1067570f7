"""Seeded random theorems for the simulated environment."""

from __future__ import annotations

import json
import random
from pathlib import Path

from .core import Hypothesis, TheoremSpec

ALPHABET = "abcde"

# Keyword presets for random_theorem. "wide" packs many short rules over a
# small alphabet so most states admit more applicable rewrites than the
# dynamic schedule keeps late in the budget.
PROFILES: dict[str, dict] = {
    "default": {},
    "wide": {"min_hyps": 12, "max_hyps": 14, "max_side": 2, "max_target": 4, "alphabet": "abcd"},
}


def _term(rng: random.Random, alphabet: str, lo: int, hi: int) -> list[str]:
    return [rng.choice(alphabet) for _ in range(rng.randint(lo, hi))]


def _unrewrite(rng, side: list[str], lhs: list[str], rhs: list[str]) -> list[str]:
    """Replace one occurrence of rhs in side by lhs (a backwards rewrite step)."""
    k = len(rhs)
    spots = [i for i in range(len(side) - k + 1) if side[i:i + k] == rhs]
    if not spots:
        return side
    i = rng.choice(spots)
    return side[:i] + lhs + side[i + k:]


def random_theorem(rng: random.Random, name: str, *, max_hyps: int = 4, min_hyps: int = 1,
                   alphabet: str = ALPHABET, max_side: int = 2, max_target: int = 3,
                   backward_steps: int = 3, conj_prob: float = 0.2,
                   constructive_prob: float = 0.7) -> TheoremSpec:
    """A random equational theorem.

    With probability ``constructive_prob`` the target is grown backwards from
    a reflexive equation, which makes it likely (not certain) to be provable.
    """
    hyps = []
    for i in range(rng.randint(min_hyps, max_hyps)):
        lhs = _term(rng, alphabet, 1, max_side)
        rhs = _term(rng, alphabet, 1, max_side)
        while rhs == lhs:
            rhs = _term(rng, alphabet, 1, max_side)
        hyps.append((f"h{i + 1}", lhs, rhs))

    def one_equation():
        if rng.random() < constructive_prob:
            t = _term(rng, alphabet, 1, max_target)
            sides = [list(t), list(t)]
            for _ in range(rng.randint(1, backward_steps)):
                _, lhs, rhs = rng.choice(hyps)
                j = rng.randrange(2)
                sides[j] = _unrewrite(rng, sides[j], lhs, rhs)
            return sides
        return [_term(rng, alphabet, 1, max_target), _term(rng, alphabet, 1, max_target)]

    eqs = [one_equation()]
    if rng.random() < conj_prob:
        eqs.append(one_equation())
    target = " ∧ ".join(f"{' '.join(l)} = {' '.join(r)}" for l, r in eqs)
    return TheoremSpec(
        name,
        tuple(Hypothesis(n, f"{' '.join(l)} = {' '.join(r)}") for n, l, r in hyps),
        target,
    )


def random_suite(n: int, seed: int = 0, prefix: str = "thm", **kwargs) -> list[TheoremSpec]:
    rng = random.Random(seed)
    return [random_theorem(rng, f"{prefix}{i:03d}", **kwargs) for i in range(n)]


def load_suite(path) -> list[TheoremSpec]:
    """Read theorem specs from a JSON array or a JSONL file."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("["):
        items = json.loads(text)
    else:
        items = [json.loads(line) for line in text.splitlines() if line.strip()]
    return [TheoremSpec.from_dict(item) for item in items]


def save_suite(path, specs) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for spec in specs:
            f.write(json.dumps(spec.to_dict(), ensure_ascii=False) + "\n")
