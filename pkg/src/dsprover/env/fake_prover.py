"""Stand-alone prover process speaking the adapter stdio protocol.

Serves the simulated environment, plus a few tactics for conformance tests:
``sleep <seconds>`` (honours ``timeout_ms`` unless started with
``--ignore-timeout``), ``garbage`` (replies with malformed JSON) and ``crash``
(exits without replying).

    python -m dsprover.env.fake_prover [--ignore-timeout]
"""

import argparse
import json
import sys
import time

from ..core import ProverError, TheoremSpec
from .base import NewState, ProofComplete, TacticTimeout
from .sim import SimEnv


def reply(obj):
    sys.stdout.write(json.dumps(obj, ensure_ascii=False) + "\n")
    sys.stdout.flush()


def main(argv=None):
    parser = argparse.ArgumentParser(prog="fake_prover")
    parser.add_argument("--ignore-timeout", action="store_true")
    args = parser.parse_args(argv)

    env = SimEnv()
    states = {}

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            reply({"ok": False, "error": "malformed request"})
            continue
        cmd = msg.get("cmd")

        if cmd == "shutdown":
            return 0

        if cmd == "init":
            try:
                spec = TheoremSpec.from_dict(msg)
                state = env.init(spec)
            except (ValueError, ProverError) as exc:
                reply({"ok": False, "error": str(exc)})
                continue
            states = {0: state}
            reply({"ok": True, "state_id": 0, "state_text": state.canonical_text})
            continue

        if cmd != "run_tac":
            reply({"ok": False, "error": f"unknown command {cmd!r}"})
            continue

        state = states.get(msg.get("state_id"))
        tactic = str(msg.get("tactic", ""))
        timeout = msg.get("timeout_ms", 10000) / 1000.0
        if state is None:
            reply({"ok": False, "error": "unknown state_id", "timeout": False})
            continue

        if tactic.startswith("sleep"):
            seconds = float(tactic.split()[1]) if len(tactic.split()) > 1 else 1.0
            if args.ignore_timeout or seconds <= timeout:
                time.sleep(seconds)
                reply({"ok": False, "error": "sleep is not a proof step", "timeout": False})
            else:
                time.sleep(timeout)
                reply({"ok": False, "error": "tactic timed out", "timeout": True})
            continue
        if tactic == "garbage":
            sys.stdout.write("{not json\n")
            sys.stdout.flush()
            continue
        if tactic == "crash":
            return 3

        outcome = env.run_tactic(state, tactic, timeout)
        if isinstance(outcome, ProofComplete):
            reply({"ok": True, "proved": True})
        elif isinstance(outcome, NewState):
            new_id = len(states)
            states[new_id] = outcome.state
            reply({"ok": True, "state_id": new_id, "state_text": outcome.state.canonical_text,
                   "proved": False})
        else:
            reply({"ok": False, "error": outcome.message,
                   "timeout": isinstance(outcome, TacticTimeout)})
    return 0


if __name__ == "__main__":
    sys.exit(main())
