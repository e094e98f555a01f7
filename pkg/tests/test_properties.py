from hypothesis import given, settings
from hypothesis import strategies as st

from rtosmc import explorer, invariants
from rtosmc.apps import APP_NAMES, build_app
from rtosmc.explorer import TAG_TICK
from rtosmc.matrix import POLICIES
from rtosmc.model import DELAYED, GlobalState, make_config

SYSTEMS = {(a, p): build_app(a, make_config(p)) for a in APP_NAMES for p in POLICIES}


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(SYSTEMS)), st.lists(st.integers(0, 7), max_size=120))
def test_random_walks_keep_invariants(cell, choices):
    sys = SYSTEMS[cell]
    s = sys.initial_state()
    for c in choices:
        succ = [t for t in explorer.successors(s) if t.violation is None]
        assert succ, "apps never deadlock"
        tr = succ[c % len(succ)]
        nxt = tr.state
        assert invariants.violations(nxt) == []
        assert GlobalState.from_key(sys, nxt.key) == nxt
        # delay counters only move down, except when a task starts a new delay
        if tr.tag == TAG_TICK:
            assert nxt.v[sys.TASKS:] == s.v[sys.TASKS:]
        for t in range(1, sys.ntasks):
            if s.life(t) == DELAYED and nxt.life(t) == DELAYED and tr.unit != t:
                assert nxt.counter(t) <= s.counter(t)
        s = nxt


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(SYSTEMS)), st.lists(st.integers(0, 7), max_size=60))
def test_successors_are_deterministic(cell, choices):
    sys = SYSTEMS[cell]
    s = sys.initial_state()
    for c in choices:
        a = explorer.successors(s)
        b = explorer.successors(s.copy(), reverse=True)
        assert [(t.label, t.state) for t in a] == [(t.label, t.state) for t in reversed(b)]
        ok = [t for t in a if t.violation is None]
        s = ok[c % len(ok)].state
