"""Command line entry point: ``dsprover {prove,bench,augment,split,serve}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path

from .core import EnvError, ProofSearchError, Proved, TheoremSpec, result_to_dict
from .env import SimEnv, make_env
from .generator import make_generator
from .schedule import DynamicScheduleConfig, FixedScheduleConfig
from .search import DEFAULT_TOTAL_TIME, EventLog, SearchConfig, clamp_tactic_timeout, prove

log = logging.getLogger("dsprover")

MAX_JOBS_VAR = "DSPROVER_MAX_JOBS"

_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d*)?|\.\d+)\s*(ms|s|m|min|h)?\s*$")
_UNITS = {None: 1.0, "s": 1.0, "ms": 1e-3, "m": 60.0, "min": 60.0, "h": 3600.0}


def parse_duration(text: str) -> float:
    """``600s``, ``1ms``, ``2.5m`` or a bare number of seconds."""
    m = _DURATION_RE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"bad duration {text!r}")
    seconds = float(m.group(1)) * _UNITS[m.group(2)]
    if seconds <= 0:
        raise argparse.ArgumentTypeError("duration must be positive")
    return seconds


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--env", default="sim", help="sim | fake | adapter[:PATH]")
    p.add_argument("--gen", default="heuristic", help="heuristic | scripted:TABLE.jsonl")
    p.add_argument("--strict", action="store_true", help="scripted table misses are errors")
    p.add_argument("--noise", type=float, default=0.0, help="rate of bogus tactics mixed in")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sampler", choices=("dynamic", "fixed"), default="dynamic")
    p.add_argument("--a", type=float, default=6.0)
    p.add_argument("--b", type=float, default=12.0)
    p.add_argument("--c", type=float, default=5.0)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--oversample", type=int, default=5)
    p.add_argument("--tactic-timeout", type=parse_duration, default=10.0)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--no-dedup", action="store_true")


def _schedule(args):
    if args.sampler == "fixed":
        return FixedScheduleConfig(args.n)
    return DynamicScheduleConfig(args.a, args.b, args.c)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsprover", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="search for a proof of one theorem")
    p.add_argument("--theorem", required=True, help="theorem spec JSON file")
    p.add_argument("--total-time", type=parse_duration, default=DEFAULT_TOTAL_TIME)
    p.add_argument("--stats", help="write search statistics JSON here")
    p.add_argument("--events", help="write the JSONL event log here")
    _add_search_flags(p)

    p = sub.add_parser("bench", help="run a suite under several methods")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--suite", help="JSON or JSONL file of theorem specs")
    src.add_argument("--random-suite", type=int, metavar="N",
                     help="generate N seeded random theorems")
    p.add_argument("--suite-seed", type=int, default=0)
    p.add_argument("--suite-profile", choices=("default", "wide"), default="default",
                   help="shape of the random theorems (wide: many applicable rules per state)")
    p.add_argument("--methods", default="dynamic,fixed")
    p.add_argument("--budgets", default="2.5s,5s,10s",
                   help="comma separated time budgets, one run of every method each")
    p.add_argument("--output", help="report JSON path (default stdout)")
    _add_search_flags(p)

    p = sub.add_parser("augment", help="decompose multi-premise tactics in a pair dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--env", default="sim", help="sim | fake | adapter[:PATH] | none")
    p.add_argument("--rewrite-only", action="store_true")
    p.add_argument("--tactic-timeout", type=parse_duration, default=10.0)

    p = sub.add_parser("split", help="seeded train/validation/test split of theorem names")
    p.add_argument("--input", required=True,
                   help="pair JSONL (theorem field) or a text file with one name per line")
    p.add_argument("--output", required=True, help="split manifest JSON")
    p.add_argument("--train", type=float, required=True, help="count, or fraction if <= 1")
    p.add_argument("--validation", type=int, required=True)
    p.add_argument("--test", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="run the HTTP job service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--max-jobs", type=int,
                   default=int(os.environ.get(MAX_JOBS_VAR, "2")))
    p.add_argument("--total-time", type=parse_duration, default=DEFAULT_TOTAL_TIME,
                   help="default per-job budget")
    p.add_argument("--persist", help="append terminal job records to this JSONL file")
    _add_search_flags(p)
    return parser


def cmd_prove(args) -> int:
    try:
        data = json.loads(Path(args.theorem).read_text(encoding="utf-8"))
        spec = TheoremSpec.from_dict(data)
        gen = make_generator(args.gen, args.noise, args.seed, args.strict)
        env = make_env(args.env)
        cfg = SearchConfig(
            schedule=_schedule(args),
            total_time=args.total_time,
            per_tactic_timeout=clamp_tactic_timeout(args.total_time, args.tactic_timeout),
            oversample_factor=args.oversample,
            max_nodes=args.max_nodes,
            dedup=not args.no_dedup,
        )
    except (OSError, ValueError, ProofSearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    events_file = open(args.events, "w", encoding="utf-8") if args.events else None
    try:
        events = EventLog(events_file, keep=False) if events_file else None
        with env:
            result, stats = prove(spec, env, gen, cfg, events=events)
    finally:
        if events_file:
            events_file.close()

    if args.stats:
        Path(args.stats).write_text(
            json.dumps({"result": result_to_dict(result), "stats": stats.to_dict()}, indent=1),
            encoding="utf-8",
        )
    if isinstance(result, Proved):
        for tactic in result.tactics:
            print(tactic)
        return 0
    if isinstance(result, EnvError):
        print(f"error: {result.message}", file=sys.stderr)
        return 1
    print(f"status: {result.status} after {result.elapsed:.3f}s, {result.node_count} nodes")
    return 2


def cmd_bench(args) -> int:
    from .bench import run_bench
    from .suite import PROFILES, load_suite, random_suite

    try:
        if args.suite:
            specs = load_suite(args.suite)
        else:
            specs = random_suite(args.random_suite, args.suite_seed,
                                 **PROFILES[args.suite_profile])
        if not specs:
            raise ValueError("empty theorem suite")
        budgets = [parse_duration(b) for b in args.budgets.split(",") if b.strip()]
        methods = {}
        for name in (m.strip() for m in args.methods.split(",")):
            if name == "dynamic":
                methods[name] = DynamicScheduleConfig(args.a, args.b, args.c)
            elif name == "fixed":
                methods[name] = FixedScheduleConfig(args.n)
            else:
                raise ValueError(f"unknown method {name!r}")
        gen = make_generator(args.gen, args.noise, args.seed, args.strict)
        make_env(args.env).close()
    except (OSError, ValueError, ProofSearchError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report = run_bench(
        specs, methods, budgets, lambda: make_env(args.env), gen,
        per_tactic_timeout=args.tactic_timeout, max_nodes=args.max_nodes,
        oversample_factor=args.oversample, progress=log.info,
    )
    text = json.dumps(report, indent=1, ensure_ascii=False)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    for section in report["budgets"]:
        rates = ", ".join(f"{m} {v['pass_at_1']:.3f}" for m, v in section["methods"].items())
        print(f"budget {section['total_time_s']:g}s: {rates}, cumulative "
              f"{section['cumulative']:.3f}", file=sys.stderr)
    return 0


def cmd_augment(args) -> int:
    from .augment import augment_dataset
    from .dataio import SchemaError

    try:
        env = None if args.env == "none" else make_env(args.env)
    except (ValueError, ProofSearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        stats = augment_dataset(args.input, args.output, env,
                                rewrite_only=args.rewrite_only, timeout=args.tactic_timeout)
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if env is not None:
            env.close()
    print(json.dumps(stats.to_dict()))
    return 0


def cmd_split(args) -> int:
    from .dataio import SchemaError, SpecError, SplitSpec, read_pairs, split_theorems, write_split_manifest

    try:
        path = Path(args.input)
        if path.suffix == ".jsonl":
            names = list(dict.fromkeys(r.theorem for r in read_pairs(path) if r.theorem))
        else:
            names = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()
                     if line.strip()]
        train = args.train if args.train <= 1 else int(args.train)
        spec = SplitSpec(train, args.validation, args.test, args.seed)
        split = split_theorems(names, spec)
        write_split_manifest(args.output, split, args.seed)
    except (OSError, SchemaError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({k: len(v) for k, v in split.items()}))
    return 0


def cmd_serve(args) -> int:
    from .service import JobManager, serve

    try:
        gen = make_generator(args.gen, args.noise, args.seed, args.strict)
        make_env(args.env).close()
    except (OSError, ValueError, ProofSearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    validator = SimEnv().validate if args.env == "sim" else None
    manager = JobManager(
        lambda: make_env(args.env), gen, schedule=_schedule(args), max_jobs=args.max_jobs,
        default_total_time=args.total_time, per_tactic_timeout=args.tactic_timeout,
        validator=validator, persist_path=args.persist,
    )
    serve(manager, args.host, args.port)
    return 0


COMMANDS = {
    "prove": cmd_prove,
    "bench": cmd_bench,
    "augment": cmd_augment,
    "split": cmd_split,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
