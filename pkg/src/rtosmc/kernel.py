"""FreeRTOS scheduler model: election, PendSV/SysTick handlers, delay/suspend/resume."""
from __future__ import annotations

from dataclasses import dataclass

from . import hw
from .model import (BLOCKED, DELAYED, FOREVER, IDLE, NONE, PENDSV_LINE, READY,
                    RUNNING, SUSPENDED, SYSTICK_LINE, Config, GlobalState, IllegalIdleBlock,
                    ModelError, Program, SchedKind)


@dataclass(frozen=True)
class TaskRecord:
    id: int
    base_priority: int
    effective_priority: int
    life_state: int
    counter: int
    blocked_on: int


def task_record(st: GlobalState, t: int) -> TaskRecord:
    return TaskRecord(t, st.sys.base_priority[t], st.eff(t), st.life(t), st.counter(t),
                      st.blocked_on(t))


def next_task_id(st: GlobalState) -> int:
    """Highest-priority schedulable task, rotating within its priority level."""
    s = st.sys
    v = st.v
    base = s.TASKS
    best = -1
    for t in range(s.ntasks):
        life = v[base + 6 * t]
        if life == READY or life == RUNNING:
            p = v[base + 6 * t + 3]
            if p > best:
                best = p
    n = s.ntasks
    last = v[s.RR + best]
    start = 0 if last == NONE else last + 1
    for k in range(n):
        t = (start + k) % n
        life = v[base + 6 * t]
        if (life == READY or life == RUNNING) and v[base + 6 * t + 3] == best:
            return t
    raise AssertionError("no schedulable task; the idle task must always be ready")


def request_switch(st: GlobalState) -> None:
    st.v[st.sys.LINES + 2 * PENDSV_LINE] = 1


def preempt_if_due(st: GlobalState, woken: int) -> None:
    """Under preemptive policies, pend PendSV when ``woken`` outranks the runner."""
    if not st.sys.policy.kind.preemptive:
        return
    cur = st.current_task()
    if cur == NONE or st.eff(woken) >= st.eff(cur):
        request_switch(st)


# handler bodies ---------------------------------------------------------------

def _set_top(st: GlobalState, unit: int) -> None:
    s = st.sys
    v = st.v
    sp = v[s.SP]
    if sp == 0:
        from .model import StackUnderflow
        raise StackUnderflow("PendSV with empty stack")
    for t in range(s.ntasks):
        if v[s.TASKS + 6 * t] == RUNNING:
            v[s.TASKS + 6 * t] = READY
    elected = next_task_id(st)
    v[s.RR + v[s.TASKS + 6 * elected + 3]] = elected
    v[s.STACK + sp - 1] = elected


def _tick(st: GlobalState, unit: int) -> None:
    from . import ipc

    s = st.sys
    v = st.v
    woken = []
    for t in range(1, s.ntasks):
        o = s.TASKS + 6 * t
        life = v[o]
        if life == DELAYED:
            c = v[o + 1] - 1
            if c <= 0:
                st.set_life(t, READY)
                woken.append(t)
            else:
                v[o + 1] = c
        elif life == BLOCKED and v[o + 1] != FOREVER:
            c = v[o + 1] - 1
            if c <= 0:
                ipc.expire(st, t)
                woken.append(t)
            else:
                v[o + 1] = c
    kind = s.policy.kind
    if kind.preemptive:
        cur = st.current_task()
        for t in woken:
            if cur == NONE or st.eff(t) >= st.eff(cur):
                request_switch(st)
                break
        if kind is SchedKind.PREEMPTIVE_SLICE:
            request_switch(st)


def _exp_return(st: GlobalState, unit: int) -> None:
    hw._return(st)


def pendsv_program() -> Program:
    p = Program("PendSV")
    p.add("set_top", _set_top, kind="set_top")
    p.add("return", _exp_return, kind="return")
    return p.seal()


def systick_program() -> Program:
    p = Program("SysTick")
    p.add("tick", _tick, kind="tick")
    p.add("return", _exp_return, kind="return")
    return p.seal()


def idle_program(config: Config) -> Program:
    def idle_loop(st: GlobalState, t: int) -> None:
        s = st.sys
        if s.policy.kind is SchedKind.COOPERATIVE:
            request_switch(st)
            return
        if s.policy.idle_yields:
            for u in range(1, s.ntasks):
                if st.life(u) == READY and st.eff(u) == 0:
                    request_switch(st)
                    return

    p = Program("idle")
    p.add("idle_loop", idle_loop, kind="idle")
    return p.seal()


# pure wrappers over the handler bodies -----------------------------------------

def pendsv_body(state: GlobalState) -> GlobalState:
    """SET_TOP(NextTaskId()) followed by ExpReturn, as one call."""
    st = state.copy()
    _set_top(st, st.ep)
    hw._return(st)
    return st


def systick_body(state: GlobalState) -> GlobalState:
    st = state.copy()
    _tick(st, st.ep)
    hw._return(st)
    return st


def trigger_systick(state: GlobalState) -> GlobalState:
    st = state.copy()
    _trigger(st)
    return st


def _trigger(st: GlobalState) -> None:
    st.v[st.sys.LINES + 2 * SYSTICK_LINE] = 1
    st.v[st.sys.ARMED] = 0


# task-level system calls (mutating; called from command actions) ---------------

def do_yield(st: GlobalState, t: int) -> None:
    request_switch(st)


def do_delay(st: GlobalState, t: int, ticks: int, clamp: bool = True) -> None:
    """Delay ``t``; ``clamp`` bounds the count by ``delay_max`` to keep the state space small."""
    if t == IDLE:
        raise IllegalIdleBlock("the idle task cannot be delayed")
    if ticks <= 0:
        request_switch(st)
        return
    if ticks >= FOREVER:
        raise ModelError(f"delay of {ticks} ticks does not fit the state encoding")
    st.set_life(t, DELAYED, min(ticks, st.sys.config.delay_max) if clamp else ticks)
    request_switch(st)


def do_suspend(st: GlobalState, t: int) -> None:
    if t == IDLE:
        raise IllegalIdleBlock("the idle task cannot be suspended")
    st.set_life(t, SUSPENDED)
    request_switch(st)


def do_suspend_other(st: GlobalState, by: int, target: int) -> None:
    """Suspend ``target`` on behalf of ``by``; a self-suspension switches away."""
    if target == by:
        do_suspend(st, target)
        return
    if target == IDLE:
        raise IllegalIdleBlock("the idle task cannot be suspended")
    if st.life(target) == BLOCKED:
        raise ModelError("suspending a task blocked on a queue or lock is not modelled")
    st.set_life(target, SUSPENDED)


def do_resume(st: GlobalState, by: int, target: int) -> None:
    if st.life(target) != SUSPENDED:
        return
    st.set_life(target, READY)
    preempt_if_due(st, target)


def yield_(state: GlobalState, t: int) -> GlobalState:
    st = state.copy()
    do_yield(st, t)
    return st


def delay_task(state: GlobalState, t: int, ticks: int) -> GlobalState:
    st = state.copy()
    do_delay(st, t, ticks)
    return st


def suspend_task(state: GlobalState, t: int) -> GlobalState:
    st = state.copy()
    do_suspend(st, t)
    return st


def resume_task(state: GlobalState, by: int, target: int) -> GlobalState:
    st = state.copy()
    do_resume(st, by, target)
    return st
