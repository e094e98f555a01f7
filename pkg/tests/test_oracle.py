import pytest

from rtosmc import explorer
from rtosmc._kernels import scc_find_cycle
from rtosmc.oracle import TOYS, Toy, brute_force_oracle, explore

EXPECTED_STARVING = {
    "hog-coop": ["B"], "yield-coop": [], "single-tick": [], "pair-noslice": [],
    "pair-slice": ["A", "B"], "idle-level": ["A"], "masked-halt": [], "no-gap": ["A"],
}


def engine(toy: Toy):
    sys = toy.to_system()
    g = explorer.build_graph(sys)
    starving = sorted(sys.unit_names[t] for t in range(1, sys.ntasks)
                      if scc_find_cycle(g.n, g.offsets, g.dst, g.tag, t, explorer.TAG_TICK)[1]
                      != -1)
    return set(g.keys), bool(g.deadlocks), starving


def test_toys_are_tiny():
    for toy in TOYS:
        assert len(toy.tasks) <= 2


@pytest.mark.parametrize("toy", TOYS, ids=lambda t: t.name)
def test_oracle_matches_engine(toy):
    ref = brute_force_oracle(toy)
    states, deadlock, starving = engine(toy)
    assert not ref["truncated"]
    assert ref["states"] == states
    assert ref["deadlock"] == deadlock
    assert ref["starving"] == starving


@pytest.mark.parametrize("toy", TOYS, ids=lambda t: t.name)
def test_oracle_verdicts_are_the_known_ones(toy):
    assert explore(toy).starving == EXPECTED_STARVING[toy.name]


def test_only_the_halting_toy_deadlocks():
    assert [t.name for t in TOYS if brute_force_oracle(t)["deadlock"]] == ["masked-halt"]


def test_truncation_is_reported():
    assert brute_force_oracle(TOYS[4], max_states=5)["truncated"]
