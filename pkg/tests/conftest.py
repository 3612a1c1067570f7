import json

import pytest

from dsprover.core import Hypothesis, TheoremSpec
from dsprover.env import SimEnv
from dsprover.generator import ScriptedGenerator

THM1_HYPS = (("h1", "x = y"), ("h2", "y = z"), ("h3", "z = w"))
THM1_HEAD = "h1: x = y\nh2: y = z\nh3: z = w\n"
THM1_TEXT = THM1_HEAD + "|- x = w"


def thm1_spec() -> TheoremSpec:
    return TheoremSpec("thm1", tuple(Hypothesis(n, s) for n, s in THM1_HYPS), "x = w")


def thm1_table() -> dict:
    return {
        THM1_TEXT: [("rw [h1, h2]", -0.1), ("assumption", -2.0)],
        THM1_HEAD + "|- z = w": [("assumption", -0.05)],
    }


def thm1_augmented_table() -> dict:
    return {
        THM1_TEXT: [("rw [h1]", -0.1)],
        THM1_HEAD + "|- y = w": [("rw [h2]", -0.1)],
        THM1_HEAD + "|- z = w": [("assumption", -0.05)],
    }


@pytest.fixture
def thm1():
    return thm1_spec()


@pytest.fixture
def sim():
    return SimEnv()


@pytest.fixture
def thm1_gen():
    return ScriptedGenerator(thm1_table())


@pytest.fixture
def thm1_files(tmp_path):
    """thm1 spec and scripted table written to disk, as the CLI reads them."""
    spec_path = tmp_path / "thm1.json"
    spec_path.write_text(json.dumps(thm1_spec().to_dict()), encoding="utf-8")
    table_path = tmp_path / "table.jsonl"
    ScriptedGenerator(thm1_table()).to_jsonl(table_path)
    return spec_path, table_path


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
