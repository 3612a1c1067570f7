"""Acceptance suite: nine end-to-end criteria, each with its own runtime limit.

Every test prints one ``PASS``/``FAIL`` line, repeated in the terminal summary.
"""

import itertools
import json
import math
import random
import threading
import time
import urllib.request

import pytest

from dsprover.augment import decompose_simp_validated
from dsprover.cli import main as cli_main
from dsprover.core import Hypothesis, ProofState, Proved, TheoremSpec
from dsprover.dataio import PairRecord
from dsprover.env import (
    DEFAULT_TACTIC_TIMEOUT,
    ProofComplete,
    ProtocolViolation,
    SimEnv,
    TacticTimeout,
    adapter_init,
    adapter_run_tactic,
    fake_prover_command,
    run_script,
)
from dsprover.generator import HeuristicSimGenerator, ScriptedGenerator
from dsprover.schedule import DynamicScheduleConfig, dynamic_sample_count
from dsprover.search import SearchConfig, prove
from dsprover.service import JobManager, make_server
from dsprover.suite import random_theorem
from dsprover.tactics import REWRITE_FAMILIES, parse_tactic
from dsprover.augment import decompose_rewrite

import conftest
from conftest import thm1_augmented_table, thm1_spec, thm1_table
from oracles import StateCapExceeded, bfs_prove, decay_count, run_decomposed
from table_rows import ROWS
from test_sim_env import random_state


class Criterion:
    def __init__(self, number, title, limit_s):
        self.number, self.title, self.limit = number, title, limit_s

    def __enter__(self):
        self.t0 = time.monotonic()
        self.detail = ""
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.t0
        ok = exc_type is None and elapsed < self.limit
        why = self.detail
        if exc_type is not None:
            why = f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        elif elapsed >= self.limit:
            why = f"runtime {elapsed:.1f}s over the {self.limit:g}s limit"
        line = (f"{'PASS' if ok else 'FAIL'} criterion {self.number} ({self.title}): "
                f"{elapsed:.2f}s / {self.limit:g}s; {why}")
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        if exc_type is None and not ok:
            raise AssertionError(line)
        return False


def test_1_schedule_exactness():
    with Criterion(1, "schedule exactness", 1.0) as c:
        cfg = DynamicScheduleConfig(6, 12, 5)
        assert dynamic_sample_count(cfg, 0.0) == 18 == decay_count(6, 12, 5, 0.0)
        assert 6 + 12 * math.exp(-5) == pytest.approx(6.0809, abs=1e-4)
        assert dynamic_sample_count(cfg, 1.0) == 6 == decay_count(6, 12, 5, 1.0)
        rng = random.Random(1)
        for _ in range(1000):
            a, b, k = rng.uniform(0.01, 50), rng.uniform(0.01, 50), rng.uniform(0.01, 20)
            r1, r2 = sorted(rng.random() for _ in range(2))
            if r1 == r2:
                continue
            cfg = DynamicScheduleConfig(a, b, k)
            assert dynamic_sample_count(cfg, r1) >= dynamic_sample_count(cfg, r2)
        c.detail = "18 at r=0, 6 at r=1, monotone over 1000 tuples"


def test_2_thm1_end_to_end():
    with Criterion(2, "thm1 end to end", 1.0) as c:
        spec, env = thm1_spec(), SimEnv()
        for table, want in [
            (thm1_table(), ("rw [h1, h2]", "assumption")),
            (thm1_augmented_table(), ("rw [h1]", "rw [h2]", "assumption")),
        ]:
            result, _ = prove(spec, env, ScriptedGenerator(table), SearchConfig())
            assert isinstance(result, Proved) and result.tactics == want
            final = run_script(env, env.init(spec), list(result.tactics))
            assert final.canonical_text == "no goals"
        c.detail = "both tables prove and replay to no goals"


def test_3_oracle_equivalence():
    with Criterion(3, "BFS oracle equivalence", 300.0) as c:
        env, gen = SimEnv(), HeuristicSimGenerator()
        rng = random.Random(2024)
        kept = resampled = provable = 0
        discrepancies = []
        while kept < 200:
            spec = random_theorem(rng, f"o{kept}_{resampled}", max_hyps=4)
            try:
                depth = bfs_prove(env, spec, max_states=2000)
            except StateCapExceeded:
                resampled += 1
                continue
            if depth is not None and depth > 5:
                resampled += 1
                continue
            kept += 1
            provable += depth is not None
            result, _ = prove(spec, env, gen, SearchConfig(total_time=60))
            if isinstance(result, Proved) != (depth is not None):
                discrepancies.append(spec.name)
            if isinstance(result, Proved):
                assert run_script(env, env.init(spec), list(result.tactics)).canonical_text == "no goals"
        assert discrepancies == []
        c.detail = (f"200 instances ({provable} provable, {resampled} resampled), "
                    f"0 discrepancies")


def test_4_augmentation_table():
    with Criterion(4, "augmentation table coverage", 1.0) as c:
        passed = 0
        for original, expected in ROWS:
            ast = parse_tactic(original)
            out = (decompose_rewrite(ast) if ast.family in REWRITE_FAMILIES
                   else [s.render() for s in ast.singles()])
            assert out == expected, original
            for text in out:
                single = parse_tactic(text)
                assert len(single.premises) == 1
                assert (single.family, single.only_modifier, single.location) == \
                    (ast.family, ast.only_modifier, ast.location)
            passed += 1
        assert passed == 24
        c.detail = "24/24 rows"


def test_5_decomposition_semantics():
    with Criterion(5, "decomposition semantics", 30.0) as c:
        env = SimEnv()
        rng = random.Random(5)
        checked = failures = 0
        while checked < 500:
            state = random_state(rng)
            names = [h.name for h in state.goals[0].hypotheses]
            premises = rng.sample(names, rng.randint(2, len(names)))
            loc = ""
            if rng.random() < 0.25:
                target_hyp = rng.choice(names)
                premises = [p for p in premises if p != target_hyp]
                loc = f" at {target_hyp}"
            if len(premises) < 2:
                continue
            multi = env.run_tactic(state, f"rw [{', '.join(premises)}]{loc}")
            if not multi.ok:
                continue
            checked += 1
            final = run_decomposed(env, state, [f"rw [{p}]{loc}" for p in premises])
            if not isinstance(final, ProofState) or final.canonical_text != multi.state.canonical_text:
                failures += 1
        assert failures == 0
        c.detail = f"{checked} states, {failures} failures"


def _spec(hyps, target, name="s"):
    return TheoremSpec(name, tuple(Hypothesis(n, s) for n, s in hyps), target)


def test_6_simp_validation_loop():
    with Criterion(6, "simp validation loop", 5.0) as c:
        env = SimEnv()
        fixtures = [
            (_spec([("h1", "a = x"), ("h2", "x b = c")], "a b = c"), "simp [h2, h1]"),
            (_spec([("h1", "a = b"), ("h2", "b c = d"), ("h3", "d = e")], "a c = e"),
             "simp [h3, h2, h1]"),
            (_spec([("h1", "p = q"), ("h2", "q q = r"), ("h3", "r = s")], "p p = s"),
             "dsimp only [h3, h1, h2]"),
            (_spec([("h1", "m = n"), ("h2", "n k = k"), ("h0", "m k = q")], "q = k"),
             "simp only [h2, h1] at h0"),
        ]
        emitted = 0
        for spec, tactic in fixtures:
            root = env.init(spec)
            pairs = decompose_simp_validated(PairRecord(root.canonical_text, tactic), env, [], spec)
            for p in pairs:
                assert env.run_tactic(ProofState.from_text(p.goal), p.tactic).ok
                again = env.run_tactic(ProofState.from_text(p.goal), p.tactic)
                assert again.ok
            # the emitted order is one that an exhaustive search over orders also finds
            singles = [s.render() for s in parse_tactic(tactic).singles()]
            emitted_tactics = [p.tactic for p in pairs]
            if emitted_tactics:
                orders = []
                for perm in itertools.permutations(singles, len(emitted_tactics)):
                    state, ok = root, True
                    for t in perm:
                        out = env.run_tactic(state, t)
                        if not out.ok:
                            ok = False
                            break
                        state = out.state
                    if ok:
                        orders.append(list(perm))
                assert emitted_tactics in orders
            emitted += len(pairs)
        simpa = _spec([("h1", "a = b"), ("h2", "b = c")], "a = c")
        assert env.run_tactic(env.init(simpa), "simpa [h1, h2]").ok
        rec = PairRecord(env.init(simpa).canonical_text, "simpa [h1, h2]")
        assert decompose_simp_validated(rec, env, [], simpa) == []
        c.detail = f"{emitted} pairs emitted, all replay; simpa fixture emits 0"


def test_7_dynamic_vs_fixed_bench(tmp_path):
    with Criterion(7, "dynamic vs fixed harness", 900.0) as c:
        out = tmp_path / "report.json"
        code = cli_main(["bench", "--random-suite", "50", "--suite-seed", "0",
                         "--suite-profile", "wide", "--budgets", "2.5s,5s,10s", "--methods", "dynamic,fixed",
                         "--output", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert len(report["theorems"]) == 50
        peaks = []
        for section in report["budgets"]:
            dyn, fix = section["methods"]["dynamic"], section["methods"]["fixed"]
            late = [r for r in dyn["runs"] if r["last_r"] is not None and r["last_r"] >= 0.5]
            assert late, f"no dynamic run reached late r at {section['total_time_s']}s"
            for run in late:
                assert run["last_n"] < run["first_n"], run
            for run in dyn["runs"]:
                if run["first_n"] is not None:
                    assert run["last_n"] <= run["first_n"], run
            peaks.append((section["total_time_s"], dyn["peak_depth"], fix["peak_depth"]))
        assert any(d >= f for _, d, f in peaks), peaks
        c.detail = "peak depth (budget, dynamic, fixed): " + ", ".join(
            f"({b:g}s, {d}, {f})" for b, d, f in peaks)


class _Gen(HeuristicSimGenerator):
    def __init__(self):
        self.table = ScriptedGenerator(thm1_table())

    def generate(self, req):
        return self.table.generate(req) or super().generate(req)


HARD = _spec([("h1", "a = a b"), ("h2", "b = a")], "a = c", "hard")


def _http(method, url, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(url, data=data, method=method)
    if data is not None:
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req, timeout=10) as resp:
        return json.loads(resp.read())


def _poll(base, job_id, limit=30):
    deadline = time.monotonic() + limit
    while time.monotonic() < deadline:
        info = _http("GET", f"{base}/jobs/{job_id}")
        if info["status"] in ("proved", "timeout", "exhausted", "error"):
            return info
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} never finished")


def test_8_service_lifecycle():
    with Criterion(8, "service lifecycle", 60.0) as c:
        manager = JobManager(SimEnv, _Gen(), max_jobs=2, per_tactic_timeout=1.0)
        srv = make_server(manager, "127.0.0.1", 0)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        base = "http://%s:%d" % srv.server_address[:2]
        try:
            proved = _poll(base, _http("POST", f"{base}/prove", thm1_spec().to_dict())["job_id"])
            assert proved["status"] == "proved"
            assert proved["proof"] == ["rw [h1, h2]", "assumption"]
            timed = _poll(base, _http("POST", f"{base}/prove",
                                      {**HARD.to_dict(), "total_time_s": 0.001})["job_id"])
            assert timed["status"] == "timeout"
            err = _poll(base, _http("POST", f"{base}/prove",
                                    {"name": "bad", "hypotheses": [], "target": "@@"})["job_id"])
            assert err["status"] == "error" and err["error"]

            ids = [_http("POST", f"{base}/prove", {**HARD.to_dict(), "total_time_s": 0.5})["job_id"]
                   for _ in range(10)]
            max_seen = 0
            while True:
                listing = _http("GET", f"{base}/jobs")
                running = sum(j["status"] == "running" for j in listing["jobs"])
                max_seen = max(max_seen, running)
                assert running <= 2
                if all(_http("GET", f"{base}/jobs/{i}")["status"] == "timeout" for i in ids):
                    break
                time.sleep(0.02)
            assert manager.peak_running <= 2

            job = _http("POST", f"{base}/prove", {**HARD.to_dict(), "total_time_s": 60})["job_id"]
            while _http("GET", f"{base}/jobs/{job}")["status"] != "running":
                time.sleep(0.01)
            t0 = time.monotonic()
            _http("DELETE", f"{base}/jobs/{job}")
            cancelled = _poll(base, job)
            stop = time.monotonic() - t0
            assert cancelled["status"] == "error"
            assert stop <= manager.per_tactic_timeout
        finally:
            srv.shutdown()
            srv.server_close()
            manager.shutdown()
        c.detail = (f"proved/timeout/error reached; peak running {manager.peak_running} of 2; "
                    f"cancel took {stop * 1000:.0f} ms")


def test_9_adapter_conformance():
    with Criterion(9, "adapter conformance", 30.0) as c:
        refl = _spec([], "x = x", "r")
        sess, sid, text = adapter_init(fake_prover_command(), refl)
        assert text == "|- x = x"
        assert isinstance(adapter_run_tactic(sess, sid, "refl")[0], ProofComplete)
        t0 = time.monotonic()
        out, _ = adapter_run_tactic(sess, sid, "sleep 30")
        waited = time.monotonic() - t0
        assert DEFAULT_TACTIC_TIMEOUT == 10.0
        assert isinstance(out, TacticTimeout)
        assert 10.0 <= waited < 12.0
        assert sess.shutdown() == 0

        rogue, sid, _ = adapter_init(fake_prover_command("--ignore-timeout"), refl)
        t0 = time.monotonic()
        out, _ = adapter_run_tactic(rogue, sid, "sleep 30", timeout=0.5)
        assert isinstance(out, TacticTimeout) and time.monotonic() - t0 < 3.5
        assert rogue.proc.poll() is not None

        bad, sid, _ = adapter_init(fake_prover_command(), refl)
        with pytest.raises(ProtocolViolation):
            adapter_run_tactic(bad, sid, "garbage")
        c.detail = f"init/run/shutdown ok; default timeout fired after {waited:.2f}s"
