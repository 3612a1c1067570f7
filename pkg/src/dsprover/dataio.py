"""Tactic-goal pair datasets: JSONL reading/writing and theorem-level splits."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import ProofSearchError

PROVENANCES = ("original", "rewrite_decomposed", "simp_validated")


class SchemaError(ProofSearchError):
    def __init__(self, line: int, reason: str, path: str | None = None):
        where = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{where}: {reason}")
        self.line = line
        self.reason = reason


class SpecError(ProofSearchError):
    pass


@dataclass(frozen=True)
class PairRecord:
    goal: str
    tactic: str
    provenance: str = "original"
    theorem: str | None = None

    def __post_init__(self):
        if not self.goal.strip() or not self.tactic.strip():
            raise ValueError("goal and tactic must be non-empty")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_dict(self) -> dict:
        out = {}
        if self.theorem is not None:
            out["theorem"] = self.theorem
        out["goal"] = self.goal
        out["tactic"] = self.tactic
        out["provenance"] = self.provenance
        return out

    @classmethod
    def from_dict(cls, data) -> "PairRecord":
        if not isinstance(data, dict):
            raise ValueError("record is not a JSON object")
        for key in ("goal", "tactic"):
            if key not in data:
                raise ValueError(f"missing {key!r}")
            if not isinstance(data[key], str) or not data[key].strip():
                raise ValueError(f"{key!r} must be a non-empty string")
        theorem = data.get("theorem")
        if theorem is not None and not isinstance(theorem, str):
            raise ValueError("'theorem' must be a string")
        provenance = data.get("provenance", "original")
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        return cls(data["goal"], data["tactic"], provenance, theorem)


def read_pairs(path) -> list[PairRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, f"invalid JSON ({exc.msg})", str(path)) from None
            try:
                records.append(PairRecord.from_dict(data))
            except ValueError as exc:
                raise SchemaError(lineno, str(exc), str(path)) from None
    return records


def write_pairs(path, records: Iterable[PairRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n")


@dataclass(frozen=True)
class SplitSpec:
    """Split shape. ``train`` may be a count or a fraction of the corpus."""

    train: float
    validation: int
    test: int
    seed: int = 0

    def counts(self, total: int) -> tuple[int, int, int]:
        if self.validation < 0 or self.test < 0 or self.train < 0:
            raise SpecError("split sizes must be non-negative")
        if isinstance(self.train, float) and self.train <= 1.0:
            train = int(round(self.train * total))
        else:
            train = int(self.train)
        if train + self.validation + self.test > total:
            raise SpecError(
                f"split {train}/{self.validation}/{self.test} exceeds corpus of {total}"
            )
        return train, self.validation, self.test


def split_theorems(names: Sequence[str], spec: SplitSpec) -> dict[str, list[str]]:
    """Seeded shuffle, then consecutive train / validation / test slices."""
    if len(set(names)) != len(names):
        raise SpecError("theorem names must be unique")
    n_train, n_val, n_test = spec.counts(len(names))
    order = sorted(names)
    random.Random(spec.seed).shuffle(order)
    return {
        "train": order[:n_train],
        "validation": order[n_train:n_train + n_val],
        "test": order[n_train + n_val:n_train + n_val + n_test],
    }


def write_split_manifest(path, split: dict[str, list[str]], seed: int) -> None:
    manifest = {**split, "seed": seed}
    Path(path).write_text(json.dumps(manifest, ensure_ascii=False, indent=1) + "\n",
                          encoding="utf-8")
