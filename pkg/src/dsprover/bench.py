"""Run a theorem suite under several search methods and summarise the outcome.

For every time budget the report gives Pass@1 per method, the cumulative
rate over the union of proved theorems, set differences between methods,
the mean number of nodes per tree depth and the distribution of proof sizes.
"""

from __future__ import annotations

import logging
from typing import Callable, Mapping, Sequence

from .core import Proved, TheoremSpec
from .env.base import ProverEnv
from .generator import TacticGenerator
from .schedule import ScheduleConfig
from .search import (
    SearchConfig,
    average_depth_histogram,
    clamp_tactic_timeout,
    proof_size_report,
    prove,
)

log = logging.getLogger(__name__)


def _run_record(spec, result, stats) -> dict:
    trace = stats.schedule_trace
    return {
        "theorem": spec.name,
        "status": result.status,
        "elapsed_s": getattr(result, "elapsed", None),
        "nodes": stats.total_nodes,
        "expansions": stats.expansions,
        "proof_size": stats.proof_size,
        "first_n": trace[0][1] if trace else None,
        "last_n": trace[-1][1] if trace else None,
        "last_r": trace[-1][0] if trace else None,
    }


def peak_depth(histogram: Mapping[int, float]) -> int | None:
    if not histogram:
        return None
    # ties go to the shallower depth
    return max(sorted(histogram), key=lambda d: histogram[d])


def run_bench(specs: Sequence[TheoremSpec], methods: Mapping[str, ScheduleConfig],
              budgets: Sequence[float], env_factory: Callable[[], ProverEnv],
              gen: TacticGenerator, *, per_tactic_timeout: float = 10.0,
              max_nodes: int | None = None, oversample_factor: int = 5,
              progress: Callable[[str], None] | None = None) -> dict:
    if not specs:
        raise ValueError("empty theorem suite")
    if not methods:
        raise ValueError("no methods given")
    report: dict = {"theorems": [s.name for s in specs], "budgets": []}
    for budget in budgets:
        cfgs = {
            name: SearchConfig(
                schedule=sched,
                total_time=budget,
                per_tactic_timeout=clamp_tactic_timeout(budget, per_tactic_timeout),
                oversample_factor=oversample_factor,
                max_nodes=max_nodes,
            )
            for name, sched in methods.items()
        }
        section: dict = {"total_time_s": budget, "methods": {}}
        proved_sets: dict[str, set[str]] = {}
        for name, cfg in cfgs.items():
            runs, outcomes = [], []
            for spec in specs:
                env = env_factory()
                try:
                    result, stats = prove(spec, env, gen, cfg)
                finally:
                    env.close()
                outcomes.append((result, stats))
                runs.append(_run_record(spec, result, stats))
                if progress:
                    progress(f"[{budget:g}s {name}] {spec.name}: {result.status}")
            proved = [s.name for s, (r, _) in zip(specs, outcomes) if isinstance(r, Proved)]
            proved_sets[name] = set(proved)
            hist = average_depth_histogram(st for _, st in outcomes)
            section["methods"][name] = {
                "pass_at_1": len(proved) / len(specs),
                "proved": proved,
                "depth_histogram": {str(d): v for d, v in hist.items()},
                "peak_depth": peak_depth(hist),
                "proof_sizes": {str(k): v for k, v in proof_size_report(outcomes).items()},
                "runs": runs,
            }
        union = set().union(*proved_sets.values())
        section["cumulative"] = len(union) / len(specs)
        section["differences"] = {
            f"{a}-{b}": sorted(proved_sets[a] - proved_sets[b])
            for a in proved_sets for b in proved_sets if a != b
        }
        report["budgets"].append(section)
    return report
