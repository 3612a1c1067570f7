"""A small deterministic prover over equations between symbol strings.

Terms are flat sequences of identifiers (a free monoid), propositions are
conjunctions of equations, and tactics rewrite with hypotheses. It is rich
enough to exercise multi-step proofs, premise decomposition and search, and
small enough that every tactic can be checked by brute force.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass

from ..core import Goal, Hypothesis, ProofState, ProverError, TheoremSpec, is_identifier
from ..tactics import MalformedBrackets, NotDecomposable, TacticAst, parse_tactic
from .base import (
    DEFAULT_TACTIC_TIMEOUT,
    ApplyOutcome,
    NewState,
    ProofComplete,
    ProverEnv,
    TacticError,
    TacticTimeout,
)

MAX_SIMP_PASSES = 64
MAX_TERM_LENGTH = 256

_CONJ_RE = re.compile(r"∧|/\\")
_SYMBOL_SPLIT_RE = re.compile(r"[\s·*]+")


class SimParseError(ProverError):
    pass


@dataclass(frozen=True)
class SimTerm:
    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise ValueError("empty term")
        for s in self.symbols:
            if not is_identifier(s):
                raise ValueError(f"invalid symbol {s!r}")

    @classmethod
    def parse(cls, text: str) -> "SimTerm":
        symbols = [s for s in _SYMBOL_SPLIT_RE.split(text.strip()) if s]
        if not symbols:
            raise SimParseError(f"empty term in {text!r}")
        for s in symbols:
            if not is_identifier(s):
                raise SimParseError(f"unexpected token {s!r}")
        return cls(tuple(symbols))

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return " ".join(self.symbols)


Equation = tuple[SimTerm, SimTerm]


def sim_rewrite(term: SimTerm, pattern: SimTerm, replacement: SimTerm) -> SimTerm | None:
    """Replace every non-overlapping occurrence of ``pattern``, scanning left to right.

    Returns None when the pattern does not occur.
    """
    src, pat, rep = term.symbols, pattern.symbols, replacement.symbols
    k = len(pat)
    out: list[str] = []
    i = 0
    found = False
    while i < len(src):
        if src[i:i + k] == pat:
            out.extend(rep)
            i += k
            found = True
        else:
            out.append(src[i])
            i += 1
    if not found:
        return None
    return SimTerm(tuple(out))


def parse_prop(text: str) -> tuple[Equation, ...]:
    """Parse ``lhs = rhs ∧ lhs = rhs ...``."""
    eqs = []
    for part in _CONJ_RE.split(text):
        sides = part.split("=")
        if len(sides) != 2:
            raise SimParseError(f"expected an equation, got {part.strip()!r}")
        eqs.append((SimTerm.parse(sides[0]), SimTerm.parse(sides[1])))
    return tuple(eqs)


def render_prop(eqs) -> str:
    return " ∧ ".join(f"{lhs} = {rhs}" for lhs, rhs in eqs)


def normalize_prop(text: str) -> str:
    return render_prop(parse_prop(text))


def _is_refl(eqs) -> bool:
    return len(eqs) == 1 and eqs[0][0] == eqs[0][1]


def _rewrite_prop(eqs, pattern: SimTerm, replacement: SimTerm):
    """Rewrite both sides of every conjunct; None when nothing matched."""
    out, hit = [], False
    for lhs, rhs in eqs:
        sides = []
        for side in (lhs, rhs):
            new = sim_rewrite(side, pattern, replacement)
            if new is None:
                sides.append(side)
            else:
                hit = True
                if len(new) > MAX_TERM_LENGTH:
                    raise _TermTooLong()
                sides.append(new)
        out.append(tuple(sides))
    return tuple(out) if hit else None


class _TermTooLong(Exception):
    pass


class _Fail(Exception):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class _Timeout(Exception):
    pass


class SimEnv(ProverEnv):
    """Deterministic rewriting prover.

    Accepted tactics: ``refl``, ``assumption``, ``split``, and the premise-list
    families ``rw``/``erw``/``rwa``/``simp_rw``/``simp``/``dsimp``/``simpa``
    (with optional ``only`` and ``at h``). Premises must name equational
    hypotheses of the first goal.
    """

    def init(self, spec: TheoremSpec) -> ProofState:
        try:
            hyps = tuple(
                Hypothesis(h.name, normalize_prop(h.statement)) for h in spec.hypotheses
            )
            goal = Goal(hyps, normalize_prop(spec.target))
        except (SimParseError, ValueError) as exc:
            raise ProverError(f"{spec.name}: {exc}") from None
        return ProofState((goal,))

    def validate(self, spec: TheoremSpec) -> None:
        self.init(spec)

    def run_tactic(self, state: ProofState, tactic: str,
                   timeout: float = DEFAULT_TACTIC_TIMEOUT) -> ApplyOutcome:
        if state.proved:
            return TacticError("no goals")
        deadline = time.monotonic() + timeout
        goal, rest = state.goals[0], state.goals[1:]
        try:
            new_goals = self._apply(goal, " ".join(tactic.split()), deadline)
        except _Fail as exc:
            return TacticError(exc.message)
        except _Timeout:
            return TacticTimeout()
        except _TermTooLong:
            return TacticError(f"term exceeds {MAX_TERM_LENGTH} symbols")
        new_state = ProofState(tuple(new_goals) + rest)
        if new_state.proved:
            return ProofComplete()
        if new_state.canonical_text == state.canonical_text:
            return TacticError("tactic made no progress")
        return NewState(new_state)

    # tactic semantics

    def _apply(self, goal: Goal, tactic: str, deadline: float) -> list[Goal]:
        target = parse_prop(goal.target)
        if tactic in ("refl", "rfl"):
            if _is_refl(target):
                return []
            raise _Fail("refl failed: sides differ")
        if tactic == "assumption":
            if any(h.statement == goal.target for h in goal.hypotheses):
                return []
            raise _Fail("assumption failed")
        if tactic == "split":
            if len(target) < 2:
                raise _Fail("split failed: target is not a conjunction")
            return [
                Goal(goal.hypotheses, render_prop(target[:1])),
                Goal(goal.hypotheses, render_prop(target[1:])),
            ]
        try:
            ast = parse_tactic(tactic)
        except (NotDecomposable, MalformedBrackets):
            raise _Fail(f"unknown tactic {tactic!r}") from None
        if ast.trailing:
            raise _Fail(f"unsupported tactic suffix {ast.trailing!r}")
        if any(p.reversed for p in ast.premises):
            raise _Fail("reverse rewriting unsupported")
        if ast.location is not None and ast.location not in {h.name for h in goal.hypotheses}:
            raise _Fail(f"unknown hypothesis {ast.location!r}")

        family = ast.family
        if family == "simpa" and ast.location is not None:
            raise _Fail("simpa does not take an `at` clause")
        if family in ("rw", "erw", "rwa"):
            goal = self._rewrite_seq(goal, ast, deadline, to_fixpoint=False)
        elif family == "simp_rw":
            goal = self._rewrite_seq(goal, ast, deadline, to_fixpoint=True)
        elif family in ("simp", "dsimp", "simpa"):
            goal = self._simp(goal, ast, deadline, must_close=family == "simpa")
        else:
            raise _Fail(f"{family} is unsupported in the simulated environment")

        if _is_refl(parse_prop(goal.target)):
            return []
        if family == "rwa":
            if any(h.statement == goal.target for h in goal.hypotheses):
                return []
            raise _Fail("rwa: assumption failed after rewriting")
        if family == "simpa":
            raise _Fail("simpa failed to close the goal")
        return [goal]

    def _equation(self, goal: Goal, name: str, location: str | None) -> Equation:
        hyp = goal.hypothesis(name)
        if hyp is None:
            raise _Fail(f"unknown identifier {name!r}")
        if name == location:
            raise _Fail(f"cannot rewrite {name} with itself")
        eqs = parse_prop(hyp.statement)
        if len(eqs) != 1:
            raise _Fail(f"{name} is not an equation")
        return eqs[0]

    def _read(self, goal: Goal, location: str | None):
        text = goal.target if location is None else goal.hypothesis(location).statement
        return parse_prop(text)

    def _write(self, goal: Goal, location: str | None, eqs) -> Goal:
        text = render_prop(eqs)
        if location is None:
            return Goal(goal.hypotheses, text)
        hyps = tuple(Hypothesis(h.name, text) if h.name == location else h
                     for h in goal.hypotheses)
        return Goal(hyps, goal.target)

    def _rewrite_seq(self, goal: Goal, ast: TacticAst, deadline: float, to_fixpoint: bool) -> Goal:
        # premises are resolved one at a time so later ones see earlier rewrites
        for premise in ast.premises:
            if time.monotonic() > deadline:
                raise _Timeout()
            lhs, rhs = self._equation(goal, premise.name, ast.location)
            eqs = self._read(goal, ast.location)
            if to_fixpoint:
                new = self._fixpoint(eqs, [(lhs, rhs)], deadline)
                if new == eqs:
                    raise _Fail(f"simp_rw made no progress with {premise.name}")
            else:
                new = _rewrite_prop(eqs, lhs, rhs)
                if new is None:
                    raise _Fail(f"no occurrence of pattern {lhs} (rewriting with {premise.name})")
                if new == eqs:
                    raise _Fail(f"rewriting with {premise.name} produced no change")
            goal = self._write(goal, ast.location, new)
        return goal

    def _fixpoint(self, eqs, rules, deadline):
        seen = {eqs}
        for _ in range(MAX_SIMP_PASSES):
            if time.monotonic() > deadline:
                raise _Timeout()
            current = eqs
            for lhs, rhs in rules:
                new = _rewrite_prop(current, lhs, rhs)
                if new is not None:
                    current = new
            if current == eqs:
                return eqs
            if current in seen:
                raise _Fail("simp failed: rewriting loops")
            seen.add(current)
            eqs = current
        raise _Fail("simp failed to converge")

    def _simp(self, goal: Goal, ast: TacticAst, deadline: float, must_close: bool) -> Goal:
        rules = [self._equation(goal, p.name, ast.location) for p in ast.premises]
        eqs = self._read(goal, ast.location)
        new = self._fixpoint(eqs, rules, deadline)
        if new == eqs and not must_close:
            raise _Fail("simp made no progress")
        return self._write(goal, ast.location, new)
