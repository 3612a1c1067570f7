from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Union

from ..core import ProofState, ProverError, TheoremSpec

DEFAULT_TACTIC_TIMEOUT = 10.0


@dataclass(frozen=True)
class NewState:
    state: ProofState
    ok = True


@dataclass(frozen=True)
class ProofComplete:
    state: ProofState = ProofState(())
    ok = True


@dataclass(frozen=True)
class TacticError:
    message: str
    ok = False


@dataclass(frozen=True)
class TacticTimeout:
    message: str = "tactic timed out"
    ok = False


ApplyOutcome = Union[NewState, ProofComplete, TacticError, TacticTimeout]


class ProcessDead(ProverError):
    pass


class ProtocolViolation(ProverError):
    pass


class ProverEnv(ABC):
    """A prover that can start a theorem and apply tactics to proof states.

    ``run_tactic`` acts on the first goal of ``state``; its subgoals replace
    that goal in place and the remaining goals are carried over unchanged.
    Implementations must report a tactic that leaves the state unchanged as a
    TacticError.
    """

    @abstractmethod
    def init(self, spec: TheoremSpec) -> ProofState:
        ...

    @abstractmethod
    def run_tactic(self, state: ProofState, tactic: str,
                   timeout: float = DEFAULT_TACTIC_TIMEOUT) -> ApplyOutcome:
        ...

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def env_init(env: ProverEnv, spec: TheoremSpec) -> ProofState:
    return env.init(spec)


def env_run_tactic(env: ProverEnv, state: ProofState, tactic: str,
                   timeout: float = DEFAULT_TACTIC_TIMEOUT) -> ApplyOutcome:
    return env.run_tactic(state, tactic, timeout)


def run_script(env: ProverEnv, state: ProofState, tactics, timeout=DEFAULT_TACTIC_TIMEOUT):
    """Apply ``tactics`` in order; returns the final state or the first failed outcome."""
    for tactic in tactics:
        if state.proved:
            return TacticError(f"no goals left for {tactic!r}")
        outcome = env.run_tactic(state, tactic, timeout)
        if not outcome.ok:
            return outcome
        state = outcome.state
    return state
