"""Training-data augmentation by splitting multi-premise tactics.

Rewrite-family tactics have ordered premises, so ``rw [p1, p2]`` becomes
``rw [p1]`` then ``rw [p2]`` by a purely textual transform. Simp-family
premises are unordered: each single-premise tactic is tried against the
environment and only the ones that actually apply are recorded.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass
from typing import Sequence

from .core import ProofSearchError, ProofState, TheoremSpec
from .dataio import PairRecord, read_pairs, write_pairs
from .env.base import DEFAULT_TACTIC_TIMEOUT, ProverEnv, run_script
from .tactics import (
    REWRITE_FAMILIES,
    SIMP_FAMILIES,
    NotDecomposable,
    TacticAst,
    parse_tactic,
    try_parse_tactic,
)

log = logging.getLogger(__name__)

# simp_rw is split textually; the validated loop also accepts it
VALIDATED_FAMILIES = SIMP_FAMILIES | {"simp_rw"}


class ReplayFailure(ProofSearchError):
    pass


def decompose_rewrite(ast: TacticAst) -> list[str]:
    if ast.family not in REWRITE_FAMILIES:
        raise NotDecomposable(
            f"{ast.family} premises are unordered; use decompose_simp_validated"
        )
    return [single.render() for single in ast.singles()]


def _reconstruct(env: ProverEnv, spec: TheoremSpec, replay: Sequence[str],
                 timeout: float) -> ProofState:
    try:
        state = env.init(spec)
    except ProofSearchError as exc:
        raise ReplayFailure(f"cannot initialise {spec.name}: {exc}") from None
    result = run_script(env, state, replay, timeout)
    if not isinstance(result, ProofState):
        raise ReplayFailure(f"replay of {spec.name} failed: {result.message}")
    return result


def decompose_simp_validated(record: PairRecord, env: ProverEnv, replay: Sequence[str],
                             spec: TheoremSpec,
                             timeout: float = DEFAULT_TACTIC_TIMEOUT) -> list[PairRecord]:
    """Greedy environment-checked split of a simp-family tactic.

    Rebuilds the record's state by replaying ``replay`` from ``spec``, then
    repeatedly applies the first remaining single-premise tactic that
    succeeds, recording (state, tactic) each time, until nothing applies or
    the goal closes. Only successful applications are emitted, so a
    simpa-style tactic whose premises only work together yields ``[]``.
    """
    ast = parse_tactic(record.tactic)
    if ast.family not in VALIDATED_FAMILIES:
        raise NotDecomposable(f"{ast.family} is not a simplification tactic")
    if len(ast.premises) < 2:
        return [record]

    state = _reconstruct(env, spec, replay, timeout)
    if state.canonical_text != record.goal:
        raise ReplayFailure(f"replayed state of {spec.name} does not match the record's goal")

    start_goals = len(state.goals)
    remaining = list(ast.premises)
    pairs: list[PairRecord] = []
    while remaining and len(state.goals) == start_goals:
        for premise in remaining:
            tactic = ast.with_premises([premise]).render()
            outcome = env.run_tactic(state, tactic, timeout)
            if not outcome.ok:
                continue
            again = env.run_tactic(state, tactic, timeout)
            if not again.ok or again.state.canonical_text != outcome.state.canonical_text:
                raise ProofSearchError(f"{tactic!r} did not replay deterministically")
            pairs.append(PairRecord(state.canonical_text, tactic, "simp_validated",
                                    record.theorem))
            state = outcome.state
            remaining.remove(premise)
            break
        else:
            break
    return pairs


@dataclass
class AugmentStats:
    originals: int = 0
    rewrite_added: int = 0
    simp_added: int = 0
    skipped: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _dedup(records):
    seen, out = set(), []
    for r in records:
        key = (r.goal, r.tactic)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


def _group_by_theorem(records):
    groups: OrderedDict[str, list[PairRecord]] = OrderedDict()
    for i, rec in enumerate(records):
        key = rec.theorem if rec.theorem is not None else f"#record{i}"
        groups.setdefault(key, []).append(rec)
    return groups


def _is_multi(ast: TacticAst | None, families) -> bool:
    return ast is not None and ast.family in families and len(ast.premises) >= 2


def _rewrite_pairs(name, recs, env, timeout, stats) -> list[PairRecord]:
    """Pairs of the theorem's proof with every multi-premise rewrite split up.

    With an environment the modified proof is re-traced so intermediate goals
    are known; without one only steps whose goal appears in the input are
    emitted and the rest are counted as skipped.
    """
    script = []
    changed = False
    for rec in recs:
        ast = try_parse_tactic(rec.tactic)
        if _is_multi(ast, REWRITE_FAMILIES):
            script.append((rec, decompose_rewrite(ast)))
            changed = True
        else:
            script.append((rec, [rec.tactic]))
    if not changed:
        return []
    theorem = recs[0].theorem

    if env is None:
        out = []
        for rec, tactics in script:
            out.append(PairRecord(rec.goal, tactics[0], "rewrite_decomposed", theorem))
            stats.skipped += len(tactics) - 1
        return out

    try:
        spec = TheoremSpec.from_state_text(name, recs[0].goal)
        state = env.init(spec)
    except (ValueError, ProofSearchError) as exc:
        log.info("skipping %s: %s", name, exc)
        stats.skipped += 1
        return []
    if state.canonical_text != recs[0].goal:
        stats.skipped += 1
        return []
    out = []
    for _, tactics in script:
        for tactic in tactics:
            if state.proved:
                stats.skipped += 1
                return []
            outcome = env.run_tactic(state, tactic, timeout)
            if not outcome.ok:
                log.info("modified proof of %s fails at %r: %s", name, tactic, outcome.message)
                stats.skipped += 1
                return []
            out.append(PairRecord(state.canonical_text, tactic, "rewrite_decomposed", theorem))
            state = outcome.state
    return out


def _simp_pairs(name, recs, env, timeout, stats) -> list[PairRecord]:
    out = []
    spec = None
    for i, rec in enumerate(recs):
        if not _is_multi(try_parse_tactic(rec.tactic), SIMP_FAMILIES):
            continue
        try:
            if spec is None:
                spec = TheoremSpec.from_state_text(name, recs[0].goal)
            replay = [r.tactic for r in recs[:i]]
            out.extend(decompose_simp_validated(rec, env, replay, spec, timeout))
        except (ValueError, ReplayFailure) as exc:
            log.info("skipping simp record %d of %s: %s", i, name, exc)
            stats.skipped += 1
    return out


def augment_records(records: Sequence[PairRecord], env: ProverEnv | None = None, *,
                    rewrite_only: bool = False,
                    timeout: float = DEFAULT_TACTIC_TIMEOUT) -> tuple[list[PairRecord], AugmentStats]:
    """Originals, then rewrite-decomposed pairs, then validated simp pairs.

    Records of one theorem must appear in proof order starting from the
    theorem's initial state. Duplicate (goal, tactic) pairs are dropped
    within each provenance class.
    """
    stats = AugmentStats(originals=len(records))
    rewrite, simp = [], []
    for name, recs in _group_by_theorem(records).items():
        rewrite.extend(_rewrite_pairs(name, recs, env, timeout, stats))
        if env is not None and not rewrite_only:
            simp.extend(_simp_pairs(name, recs, env, timeout, stats))
    rewrite, simp = _dedup(rewrite), _dedup(simp)
    stats.rewrite_added = len(rewrite)
    stats.simp_added = len(simp)
    return list(records) + rewrite + simp, stats


def augment_dataset(in_path, out_path, env: ProverEnv | None = None, *,
                    rewrite_only: bool = False,
                    timeout: float = DEFAULT_TACTIC_TIMEOUT) -> AugmentStats:
    records = read_pairs(in_path)
    out, stats = augment_records(records, env, rewrite_only=rewrite_only, timeout=timeout)
    write_pairs(out_path, out)
    return stats
