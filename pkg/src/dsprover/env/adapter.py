"""Client side of the newline-delimited JSON protocol spoken by external provers.

One JSON object per line, strictly alternating request/response::

    {"cmd": "init", "name": ..., "hypotheses": [...], "target": ...}
    {"cmd": "run_tac", "state_id": N, "tactic": ..., "timeout_ms": 10000}
    {"cmd": "shutdown"}

The prover is expected to enforce ``timeout_ms`` itself and answer with
``{"ok": false, "timeout": true}``; if it stays silent past the timeout plus a
grace period the process is killed and the session is dead.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import subprocess
import sys
import threading
from pathlib import Path
from typing import Sequence, Union

from ..core import ProofState, ProverError, TheoremSpec
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
)

log = logging.getLogger(__name__)

INIT_TIMEOUT = 30.0
TIMEOUT_GRACE = 2.0
_EOF = object()

Command = Union[str, os.PathLike, Sequence[str]]


def fake_prover_command(*extra: str) -> list[str]:
    """Command line for the bundled fake prover (serves the simulated environment)."""
    return [sys.executable, "-m", "dsprover.env.fake_prover", *extra]


def _as_argv(executable: Command) -> list[str]:
    if isinstance(executable, (str, os.PathLike)):
        path = str(executable)
        if path.endswith(".py"):
            return [sys.executable, path]
        return [path]
    return [str(x) for x in executable]


class AdapterSession:
    def __init__(self, executable: Command):
        self.argv = _as_argv(executable)
        env = dict(os.environ)
        env["DSPROVER_OFFLINE"] = "1"
        try:
            self.proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
                env=env,
            )
        except OSError as exc:
            raise ProcessDead(f"cannot start {self.argv[0]}: {exc}") from None
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.dead = False

    def _read_loop(self):
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def request(self, payload: dict, timeout: float) -> dict:
        if self.dead:
            raise ProcessDead("adapter process is no longer usable")
        try:
            self.proc.stdin.write(json.dumps(payload, ensure_ascii=False) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            self.dead = True
            raise ProcessDead("adapter process closed its input") from None
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            self.kill()
            raise
        if line is _EOF:
            self.dead = True
            raise ProcessDead(f"adapter process exited (code {self.proc.poll()})")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            self.kill()
            raise ProtocolViolation(f"malformed reply: {line.strip()[:200]!r}") from None
        if not isinstance(reply, dict) or not isinstance(reply.get("ok"), bool):
            self.kill()
            raise ProtocolViolation(f"reply lacks a boolean 'ok': {line.strip()[:200]!r}")
        return reply

    def kill(self):
        self.dead = True
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()

    def shutdown(self, timeout: float = 5.0) -> int | None:
        if self.dead:
            return self.proc.poll()
        self.dead = True
        try:
            self.proc.stdin.write(json.dumps({"cmd": "shutdown"}) + "\n")
            self.proc.stdin.flush()
            self.proc.stdin.close()
        except (BrokenPipeError, OSError, ValueError):
            pass
        try:
            return self.proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()
            return None


def adapter_init(executable: Command, theorem: TheoremSpec) -> tuple[AdapterSession, int, str]:
    """Start a prover process and load ``theorem``; returns (session, state_id, state_text)."""
    session = AdapterSession(executable)
    payload = {"cmd": "init", **theorem.to_dict()}
    try:
        reply = session.request(payload, INIT_TIMEOUT)
    except queue.Empty:
        raise ProcessDead("adapter did not answer init") from None
    if not reply["ok"]:
        session.shutdown()
        raise ProverError(str(reply.get("error", "init failed")))
    try:
        return session, int(reply["state_id"]), str(reply["state_text"])
    except (KeyError, TypeError, ValueError):
        session.kill()
        raise ProtocolViolation(f"init reply missing state: {reply!r}") from None


def adapter_run_tactic(session: AdapterSession, state_id: int, tactic: str,
                       timeout: float = DEFAULT_TACTIC_TIMEOUT) -> tuple[ApplyOutcome, int | None]:
    """Run one tactic; returns the outcome and the new state's id (None unless NewState)."""
    payload = {
        "cmd": "run_tac",
        "state_id": state_id,
        "tactic": tactic,
        "timeout_ms": int(round(timeout * 1000)),
    }
    try:
        reply = session.request(payload, timeout + TIMEOUT_GRACE)
    except queue.Empty:
        log.warning("adapter ignored its %.1fs timeout on %r; killed", timeout, tactic)
        return TacticTimeout(), None
    if not reply["ok"]:
        if reply.get("timeout"):
            return TacticTimeout(), None
        return TacticError(str(reply.get("error", "tactic failed"))), None
    if reply.get("proved"):
        return ProofComplete(), None
    try:
        new_id = int(reply["state_id"])
        state = ProofState.from_text(reply["state_text"])
    except (KeyError, TypeError, ValueError) as exc:
        session.kill()
        raise ProtocolViolation(f"bad run_tac reply {reply!r}: {exc}") from None
    return NewState(state), new_id


class AdapterEnv(ProverEnv):
    """ProverEnv backed by an external process speaking the stdio protocol."""

    def __init__(self, executable: Command):
        if isinstance(executable, (str, os.PathLike)) and not str(executable).endswith(".py"):
            if not Path(executable).exists():
                raise ProverError(f"adapter executable not found: {executable}")
        self.executable = executable
        self.session: AdapterSession | None = None
        self._ids: dict[str, int] = {}

    def init(self, spec: TheoremSpec) -> ProofState:
        self.close()
        self.session, state_id, text = adapter_init(self.executable, spec)
        state = ProofState.from_text(text)
        self._ids = {state.canonical_text: state_id}
        return state

    def run_tactic(self, state: ProofState, tactic: str,
                   timeout: float = DEFAULT_TACTIC_TIMEOUT) -> ApplyOutcome:
        if self.session is None:
            raise ProcessDead("adapter not initialised")
        state_id = self._ids.get(state.canonical_text)
        if state_id is None:
            return TacticError("state unknown to the adapter session")
        outcome, new_id = adapter_run_tactic(self.session, state_id, tactic, timeout)
        if isinstance(outcome, NewState):
            if outcome.state.canonical_text == state.canonical_text:
                return TacticError("tactic made no progress")
            self._ids.setdefault(outcome.state.canonical_text, new_id)
        return outcome

    def close(self) -> None:
        if self.session is not None:
            self.session.shutdown()
            self.session = None
