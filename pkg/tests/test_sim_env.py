import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsprover.core import Hypothesis, ProofState, ProverError, TheoremSpec
from dsprover.env import (
    NewState,
    ProofComplete,
    SimEnv,
    SimTerm,
    TacticError,
    TacticTimeout,
    env_init,
    env_run_tactic,
    run_script,
    sim_rewrite,
)

from conftest import THM1_HEAD, THM1_TEXT
from oracles import brute_rewrite, run_decomposed


def _t(s):
    return SimTerm(tuple(s.split()))


@pytest.mark.parametrize("term, pat, rep, want", [
    ("x", "x", "y", "y"),
    ("a b a b", "a b", "c", "c c"),
    ("a a a", "a a", "b", "b a"),
])
def test_sim_rewrite_examples(term, pat, rep, want):
    assert sim_rewrite(_t(term), _t(pat), _t(rep)) == _t(want)
    assert brute_rewrite(term.split(), pat.split(), rep.split()) == tuple(want.split())


def test_sim_rewrite_no_occurrence():
    assert sim_rewrite(_t("a b"), _t("c"), _t("d")) is None


syms = st.lists(st.sampled_from("abc"), min_size=1, max_size=10)


@settings(max_examples=500)
@given(syms, st.lists(st.sampled_from("abc"), min_size=1, max_size=3), syms)
def test_sim_rewrite_against_brute_force(term, pat, rep):
    got = sim_rewrite(SimTerm(tuple(term)), SimTerm(tuple(pat)), SimTerm(tuple(rep)))
    want = brute_rewrite(term, pat, rep)
    assert (got.symbols if got is not None else None) == want


def test_term_parsing_separators():
    assert SimTerm.parse("a·b * c  d").symbols == ("a", "b", "c", "d")
    with pytest.raises(ProverError):
        SimTerm.parse("@@")


def test_init_thm1(sim, thm1):
    state = env_init(sim, thm1)
    assert state.canonical_text == THM1_TEXT
    assert len(state.goals) == 1


def test_init_refl_goal(sim):
    state = sim.init(TheoremSpec("t", (), "x = x"))
    assert isinstance(sim.run_tactic(state, "refl"), ProofComplete)


def test_init_parse_error(sim):
    with pytest.raises(ProverError):
        sim.init(TheoremSpec("t", (), "@@"))


def test_thm1_rw_then_assumption(sim, thm1):
    out = env_run_tactic(sim, sim.init(thm1), "rw [h1, h2]")
    assert isinstance(out, NewState)
    assert out.state.canonical_text == THM1_HEAD + "|- z = w"
    assert isinstance(sim.run_tactic(out.state, "assumption"), ProofComplete)


def test_rw_without_occurrence_fails(sim, thm1):
    out = sim.run_tactic(sim.init(thm1), "rw [h3]")
    assert isinstance(out, TacticError)
    assert "no occurrence of pattern" in out.message


def test_rw_at_hypothesis(sim):
    state = sim.init(TheoremSpec("t", (Hypothesis("h1", "a = b"), Hypothesis("h2", "a c = d")),
                                 "b c = d"))
    out = sim.run_tactic(state, "rw [h1] at h2")
    assert out.state.goals[0].hypothesis("h2").statement == "b c = d"
    assert isinstance(sim.run_tactic(out.state, "assumption"), ProofComplete)


def test_rwa(sim, thm1):
    assert isinstance(sim.run_tactic(sim.init(thm1), "rwa [h1, h2]"), ProofComplete)
    assert isinstance(sim.run_tactic(sim.init(thm1), "rwa [h1]"), TacticError)


def test_reverse_rewrite_unsupported(sim, thm1):
    out = sim.run_tactic(sim.init(thm1), "rw [← h1]")
    assert out.message == "reverse rewriting unsupported"


def test_unknown_tactic(sim, thm1):
    assert isinstance(sim.run_tactic(sim.init(thm1), "nlinarith"), TacticError)


def test_split_goal_accounting(sim):
    state = sim.init(TheoremSpec("t", (), "a = a ∧ b = c"))
    out = sim.run_tactic(state, "split")
    assert [g.target for g in out.state.goals] == ["a = a", "b = c"]
    out2 = sim.run_tactic(out.state, "refl")
    assert [g.target for g in out2.state.goals] == ["b = c"]


def test_simp_fixpoint_and_no_progress(sim):
    hyps = (Hypothesis("h1", "a = b"), Hypothesis("h2", "b = c"))
    state = sim.init(TheoremSpec("t", hyps, "a a = c d"))
    out = sim.run_tactic(state, "simp [h1, h2]")
    assert out.state.goals[0].target == "c c = c d"
    assert isinstance(sim.run_tactic(out.state, "simp [h1]"), TacticError)
    only = sim.run_tactic(state, "simp only [h1, h2]")
    assert only.state == out.state


def test_simp_loop_detected(sim):
    hyps = (Hypothesis("h1", "a = b"), Hypothesis("h2", "b = a"))
    out = sim.run_tactic(sim.init(TheoremSpec("t", hyps, "a = c")), "simp [h1, h2]")
    assert isinstance(out, TacticError)


def test_term_growth_is_bounded(sim):
    state = sim.init(TheoremSpec("t", (Hypothesis("h", "a = a a"),), "a = b"))
    out = sim.run_tactic(state, "simp [h]")
    assert isinstance(out, TacticError)


def test_zero_timeout(sim):
    state = sim.init(TheoremSpec("t", (Hypothesis("h", "a = b"),), "a = c"))
    assert isinstance(sim.run_tactic(state, "simp [h]", timeout=-1.0), TacticTimeout)


def test_no_goals_state(sim):
    assert isinstance(sim.run_tactic(ProofState(()), "refl"), TacticError)


def test_run_script(sim, thm1):
    final = run_script(sim, sim.init(thm1), ["rw [h1]", "rw [h2]", "assumption"])
    assert final.canonical_text == "no goals"
    bad = run_script(sim, sim.init(thm1), ["rw [h3]"])
    assert isinstance(bad, TacticError)


# random states

def random_state(rng: random.Random):
    hyps = []
    for i in range(rng.randint(2, 4)):
        lhs = " ".join(rng.choice("abcd") for _ in range(rng.randint(1, 2)))
        rhs = " ".join(rng.choice("abcd") for _ in range(rng.randint(1, 2)))
        hyps.append(Hypothesis(f"h{i + 1}", f"{lhs} = {rhs}"))
    sides = [" ".join(rng.choice("abcd") for _ in range(rng.randint(1, 5))) for _ in range(2)]
    target = f"{sides[0]} = {sides[1]}"
    if rng.random() < 0.2:
        target += " ∧ a = b"
    return SimEnv().init(TheoremSpec("r", tuple(hyps), target))


TACTICS = ["refl", "assumption", "split", "rw [h1]", "rw [h2]", "simp [h1]", "simp [h1, h2]",
           "rw [h2] at h1", "simp_rw [h1]", "rw [h1, h2]"]


@settings(max_examples=200)
@given(st.integers(0, 10**9), st.sampled_from(TACTICS))
def test_state_isolation_and_goal_accounting(seed, tactic):
    env = SimEnv()
    state = random_state(random.Random(seed))
    before = state.canonical_text
    first = env.run_tactic(state, tactic)
    second = env.run_tactic(state, tactic)
    assert state.canonical_text == before
    assert first == second
    if first.ok:
        grew = len(first.state.goals) - (len(state.goals) - 1)
        assert grew in ((0, 1, 2) if tactic == "split" else (0, 1))
        assert first.state.canonical_text != before
    if tactic.startswith("simp [") and isinstance(first, NewState):
        assert first.state.canonical_text != before


@settings(max_examples=300)
@given(st.integers(0, 10**9), st.permutations(["h1", "h2", "h3"]), st.integers(2, 3),
       st.booleans())
def test_rewrite_decomposition_equivalence(seed, order, k, at_hyp):
    env = SimEnv()
    state = random_state(random.Random(seed))
    names = [h.name for h in state.goals[0].hypotheses]
    premises = [p for p in order if p in names][:k]
    loc = ""
    if at_hyp:
        loc = " at " + names[-1]
        premises = [p for p in premises if p != names[-1]]
    if len(premises) < 2:
        return
    multi = env.run_tactic(state, f"rw [{', '.join(premises)}]{loc}")
    if not multi.ok:
        return
    final = run_decomposed(env, state, [f"rw [{p}]{loc}" for p in premises])
    assert isinstance(final, ProofState), final
    assert final.canonical_text == multi.state.canonical_text
