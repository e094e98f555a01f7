import pytest

from rtosmc import explorer, invariants, ipc
from rtosmc.apps import APP_NAMES, build_app
from rtosmc.model import BLOCKED, DELAYED, FOREVER, RUNNING, make_config

from systems import with_mutex, with_queue


@pytest.mark.parametrize("name", APP_NAMES)
def test_initial_states_are_clean(name):
    assert invariants.violations(build_app(name, make_config()).initial_state()) == []


def test_reachable_states_of_small_cells_are_clean():
    sys = build_app("Recmutex", make_config("timeslice"))
    g = explorer.build_graph(sys, on_state=invariants.check_state)
    assert g.n > 100


def _broken(mutate, factory=with_queue):
    st = factory().initial_state()
    mutate(st)
    return invariants.violations(st)


def test_detects_two_running_tasks():
    assert _broken(lambda st: st.set_life(1, RUNNING))


def test_detects_priority_below_base():
    assert _broken(lambda st: st.set_eff(3, 0))


def test_detects_zero_delay_counter():
    assert _broken(lambda st: st.set_life(1, DELAYED, 0))


def test_detects_blocked_task_missing_from_waiters():
    assert _broken(lambda st: st.set_life(1, BLOCKED, FOREVER, 1))


def test_detects_waiter_out_of_priority_order():
    def mutate(st):
        ipc.receive(st, 0, 2, FOREVER)
        ipc.receive(st, 0, 1, FOREVER)
        o = st.sys.QUEUES[0] + 1 + 2 + 1 + st.sys.ntasks
        st.v[o + 1], st.v[o + 2] = st.v[o + 2], st.v[o + 1]
    assert _broken(mutate)


def test_detects_uninherited_priority():
    def mutate(st):
        ipc.take(st, 0, 1, 0)
        ipc.take(st, 0, 3, FOREVER)
        st.set_eff(1, 1)
    assert _broken(mutate, with_mutex)


def test_check_state_raises_with_description():
    st = with_queue().initial_state()
    st.set_life(1, RUNNING)
    with pytest.raises(invariants.InvariantBroken, match="tasks"):
        invariants.check_state(st)
