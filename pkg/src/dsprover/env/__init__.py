"""Prover environments: the abstract interface, a simulated prover, and a subprocess adapter."""

import os

from .adapter import AdapterEnv, AdapterSession, adapter_init, adapter_run_tactic, fake_prover_command
from .base import (
    DEFAULT_TACTIC_TIMEOUT,
    ApplyOutcome,
    NewState,
    ProcessDead,
    ProofComplete,
    ProtocolViolation,
    ProverEnv,
    TacticError,
    TacticTimeout,
    env_init,
    env_run_tactic,
    run_script,
)
from .sim import SimEnv, SimTerm, sim_rewrite

ADAPTER_PATH_VAR = "DSPROVER_ADAPTER_PATH"


def make_env(name: str) -> ProverEnv:
    """Build an environment from ``sim``, ``adapter`` or ``adapter:<path>``."""
    if name == "sim":
        return SimEnv()
    if name == "fake":
        return AdapterEnv(fake_prover_command())
    if name == "adapter" or name.startswith("adapter:"):
        path = name.partition(":")[2] or os.environ.get(ADAPTER_PATH_VAR)
        if not path:
            raise ValueError(f"adapter path missing: use adapter:<path> or set {ADAPTER_PATH_VAR}")
        return AdapterEnv(path)
    raise ValueError(f"unknown environment {name!r}")


__all__ = [
    "ADAPTER_PATH_VAR", "AdapterEnv", "AdapterSession", "ApplyOutcome", "DEFAULT_TACTIC_TIMEOUT",
    "NewState", "ProcessDead", "ProofComplete", "ProtocolViolation", "ProverEnv", "SimEnv",
    "SimTerm", "TacticError", "TacticTimeout", "adapter_init", "adapter_run_tactic",
    "env_init", "env_run_tactic", "fake_prover_command", "make_env", "run_script", "sim_rewrite",
]
