import pytest

from rtosmc import hw, kernel
from rtosmc.model import (DELAYED, FOREVER, PENDSV_LINE, READY, RUNNING, SUSPENDED,
                          SYSTICK_LINE, IllegalIdleBlock, ModelError)

from systems import tiny


def test_next_task_prefers_highest_priority():
    st = tiny(prios=(1, 3, 2)).initial_state()
    assert kernel.next_task_id(st) == 2


def test_round_robin_within_level():
    sys = tiny(prios=(1, 1, 1))
    st = sys.initial_state()
    order = []
    for _ in range(4):
        st = hw.exception_entry(st, PENDSV_LINE)
        st = kernel.pendsv_body(st)
        order.append(st.ep)
    assert order == [2, 3, 1, 2]


def test_idle_runs_when_nothing_else_is_ready():
    sys = tiny(prios=(1,))
    st = sys.initial_state()
    st.set_life(1, SUSPENDED)
    assert kernel.next_task_id(st) == 0


def test_delay_clamps_and_requests_switch():
    st = tiny(delay_max=3).initial_state()
    kernel.do_delay(st, 1, 10)
    assert st.life(1) == DELAYED and st.counter(1) == 3
    assert st.pending(PENDSV_LINE)


def test_delay_without_clamp_keeps_count():
    st = tiny(delay_max=3).initial_state()
    kernel.do_delay(st, 1, 20, clamp=False)
    assert st.counter(1) == 20


def test_zero_delay_only_yields():
    st = tiny().initial_state()
    kernel.do_delay(st, 1, 0)
    assert st.life(1) != DELAYED and st.pending(PENDSV_LINE)


@pytest.mark.parametrize("ticks", [FOREVER, 300])
def test_delay_too_long_is_rejected(ticks):
    with pytest.raises(ModelError):
        kernel.do_delay(tiny().initial_state(), 1, ticks)


def test_idle_cannot_block():
    st = tiny().initial_state()
    with pytest.raises(IllegalIdleBlock):
        kernel.do_delay(st, 0, 2)
    with pytest.raises(IllegalIdleBlock):
        kernel.do_suspend(st, 0)
    with pytest.raises(IllegalIdleBlock):
        kernel.do_suspend_other(st, 1, 0)


def _in_tick(sys, runner_prio_task, sleeper, ticks=1):
    st = sys.initial_state()
    kernel.do_delay(st, sleeper, ticks)
    st.set_pending(PENDSV_LINE, False)
    st.ep = runner_prio_task
    st = hw.exception_entry(st, SYSTICK_LINE)
    return kernel.systick_body(st)


def test_tick_wakes_and_preempts_on_equal_priority():
    out = _in_tick(tiny("preemptive", prios=(1, 1)), 2, 1)
    assert out.life(1) == RUNNING or out.life(1) == READY
    assert out.counter(1) == 0
    # the wake at equal priority pends PendSV, which the return tail-chains into
    assert out.ep == out.sys.pendsv


def test_tick_does_not_preempt_for_lower_priority():
    out = _in_tick(tiny("preemptive", prios=(1, 2)), 2, 1)
    assert out.life(1) == READY
    assert out.ep == 2


def test_cooperative_tick_never_preempts():
    out = _in_tick(tiny("cooperative", prios=(2, 1)), 2, 1)
    assert out.ep == 2 and out.life(1) == READY


def test_timeslice_tick_always_switches():
    sys = tiny("timeslice", prios=(1, 1))
    st = hw.exception_entry(sys.initial_state(), SYSTICK_LINE)
    assert kernel.systick_body(st).ep == sys.pendsv


def test_tick_only_counts_down_unexpired_delays():
    out = _in_tick(tiny("preemptive"), 2, 1, ticks=3)
    assert out.life(1) == DELAYED and out.counter(1) == 2


def test_suspend_and_resume():
    sys = tiny("preemptive", prios=(1, 2))
    st = sys.initial_state()
    st = kernel.suspend_task(st, 1)
    assert st.life(1) == SUSPENDED
    st.set_pending(PENDSV_LINE, False)
    st = kernel.resume_task(st, 2, 1)
    assert st.life(1) == READY
    assert not st.pending(PENDSV_LINE), "a lower-priority resume does not preempt"
    again = kernel.resume_task(st, 2, 1)
    assert again == st


def test_resume_of_higher_priority_preempts():
    sys = tiny("preemptive", prios=(2, 1))
    st = sys.initial_state()
    kernel.do_suspend_other(st, 2, 1)
    assert st.life(1) == SUSPENDED
    st.ep = 2
    kernel.do_resume(st, 2, 1)
    assert st.pending(PENDSV_LINE)


def test_suspending_a_blocked_task_is_unsupported():
    st = tiny(queues=[("Q", 1)]).initial_state()
    from rtosmc import ipc
    ipc.receive(st, 0, 1, FOREVER)
    with pytest.raises(ModelError):
        kernel.do_suspend_other(st, 2, 1)


@pytest.mark.parametrize("policy,idle_yields,peer_ready,expect", [
    ("cooperative", True, False, True),
    ("preemptive", True, True, True),
    ("preemptive", True, False, False),
    ("timeslice", False, True, False),
])
def test_idle_loop_yield_rule(policy, idle_yields, peer_ready, expect):
    sys = tiny(policy, prios=(0,), idle_yields=idle_yields)
    st = sys.initial_state()
    st.ep = 0
    if not peer_ready:
        st.set_life(1, SUSPENDED)
    sys.programs[0].commands[0].action(st, 0)
    assert st.pending(PENDSV_LINE) == expect


def test_trigger_disarms():
    st = kernel.trigger_systick(tiny().initial_state())
    assert st.pending(SYSTICK_LINE) and not st.armed


def test_task_record():
    rec = kernel.task_record(tiny(prios=(4,)).initial_state(), 1)
    assert rec.base_priority == 4 and rec.effective_priority == 4
