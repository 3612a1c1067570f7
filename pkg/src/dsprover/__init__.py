"""Best-first theorem-proving search with a time-decaying sampling schedule."""

from .core import (
    EnvError,
    Goal,
    Hypothesis,
    ProofState,
    Proved,
    QueueExhausted,
    SearchNode,
    SearchStats,
    TacticCandidate,
    TheoremSpec,
    Timeout,
    canonicalize_state,
    extract_proof,
)
from .schedule import DynamicScheduleConfig, FixedScheduleConfig, TimeBudget
from .search import SearchConfig, prove

__version__ = "0.1.0"

__all__ = [
    "DynamicScheduleConfig",
    "EnvError",
    "FixedScheduleConfig",
    "Goal",
    "Hypothesis",
    "ProofState",
    "Proved",
    "QueueExhausted",
    "SearchConfig",
    "SearchNode",
    "SearchStats",
    "TacticCandidate",
    "TheoremSpec",
    "TimeBudget",
    "Timeout",
    "canonicalize_state",
    "extract_proof",
    "prove",
]
