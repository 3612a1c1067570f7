"""How many tactics to apply when expanding a node.

The dynamic schedule decays exponentially with the fraction of the time
budget already spent: ``n = a + b * exp(-c * r)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Union

DEFAULT_OVERSAMPLE = 5


@dataclass(frozen=True)
class DynamicScheduleConfig:
    a: float = 6.0
    b: float = 12.0
    c: float = 5.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.b < 0 or self.c < 0:
            raise ValueError("b and c must be non-negative")

    kind = "dynamic"


@dataclass(frozen=True)
class FixedScheduleConfig:
    n: int = 64

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    kind = "fixed"


ScheduleConfig = Union[DynamicScheduleConfig, FixedScheduleConfig]


@dataclass(frozen=True)
class TimeBudget:
    total: float
    started_at: float = field(default_factory=time.monotonic)

    def __post_init__(self):
        if not self.total > 0:
            raise ValueError(f"time budget must be positive, got {self.total}")

    def elapsed(self, now: float | None = None) -> float:
        return (time.monotonic() if now is None else now) - self.started_at

    def expired(self, now: float | None = None) -> bool:
        return self.elapsed(now) >= self.total


def elapsed_ratio(budget: TimeBudget, now: float | None = None) -> float:
    """Fraction of the budget spent, clamped to [0, 1]."""
    r = budget.elapsed(now) / budget.total
    return min(1.0, max(0.0, r))


def round_half_up(x: float) -> int:
    # x - floor(x) is exact, unlike x + 0.5 which can round up 0.49999999999999994
    whole = math.floor(x)
    return whole + (1 if x - whole >= 0.5 else 0)


def dynamic_sample_count(cfg: DynamicScheduleConfig, r: float) -> int:
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"elapsed ratio must lie in [0, 1], got {r}")
    return max(1, round_half_up(cfg.a + cfg.b * math.exp(-cfg.c * r)))


def fixed_sample_count(cfg: FixedScheduleConfig) -> int:
    return int(cfg.n)


def oversample_request(n: int, factor: int = DEFAULT_OVERSAMPLE) -> int:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return factor * n


def sample_count(cfg: ScheduleConfig, r: float) -> int:
    if isinstance(cfg, DynamicScheduleConfig):
        return dynamic_sample_count(cfg, r)
    return fixed_sample_count(cfg)


def request_size(cfg: ScheduleConfig, n: int, factor: int = DEFAULT_OVERSAMPLE) -> int:
    """Number of candidates to ask the generator for.

    Only the dynamic schedule oversamples; the fixed baseline asks for exactly n
    and keeps every success.
    """
    if isinstance(cfg, DynamicScheduleConfig):
        return oversample_request(n, factor)
    return n
