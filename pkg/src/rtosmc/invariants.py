"""Structural invariants every reachable state must satisfy.

These hold by construction of the kernel and IPC code; running them as an
``on_state`` hook during exploration catches modelling bugs early.
"""
from __future__ import annotations

from .model import (BLOCKED, DELAYED, FOREVER, IDLE, NONE, RUNNING, GlobalState, ModelError)


class InvariantBroken(ModelError):
    pass


def _waiter_lists(st: GlobalState):
    """Yield (accepted object codes, members) for every waiter list.

    Receivers and peekers of a queue share one list.
    """
    s = st.sys
    for qi in range(len(s.queues)):
        yield (3 * qi,), st.queue_waiters(qi, "send")
        yield (3 * qi + 1, 3 * qi + 2), st.queue_waiters(qi, "recv")
    for li in range(len(s.locks)):
        yield (3 * len(s.queues) + li,), st.lock_waiters(li)


def violations(st: GlobalState) -> list[str]:
    s = st.sys
    out: list[str] = []
    sp = st.v[s.SP]
    cap = s.config.stack_capacity
    stack = [st.v[s.STACK + i] for i in range(cap)]
    if not 0 <= sp <= cap:
        out.append(f"stack pointer {sp} outside 0..{cap}")
    elif any(x == NONE for x in stack[:sp]) or any(x != NONE for x in stack[sp:]):
        out.append(f"stack slots inconsistent with depth {sp}: {stack}")
    if sp and not s.is_task(stack[0]):
        out.append("bottom of the exception stack is not a task")

    running = [t for t in range(s.ntasks) if st.life(t) == RUNNING]
    if len(running) > 1:
        out.append(f"several running tasks: {running}")
    for t in running:
        if t != st.current_task():
            out.append(f"task {s.unit_names[t]} running but not current")
    if st.life(IDLE) not in (0, RUNNING):
        out.append("idle task left the ready/running states")

    for t in range(s.ntasks):
        name = s.unit_names[t]
        life, c = st.life(t), st.counter(t)
        if st.eff(t) < s.base_priority[t]:
            out.append(f"{name} effective priority below its base")
        if life == DELAYED and not 1 <= c < FOREVER:
            out.append(f"{name} delayed with counter {c}")
        if life == BLOCKED:
            if c == 0:
                out.append(f"{name} blocked with an exhausted timeout")
        elif st.blocked_on(t) != NONE:
            out.append(f"{name} records a blocking object while not blocked")

    seen: dict[int, int] = {}
    for objs, members in _waiter_lists(st):
        obj = objs[0]
        for w in members:
            if w in seen:
                out.append(f"task {w} waits on two objects")
            seen[w] = obj
            if st.life(w) != BLOCKED or st.blocked_on(w) not in objs:
                out.append(f"task {w} listed as a waiter on {obj} but not blocked there")
        if s.config.waiter_order == "priority":
            prios = [st.eff(w) for w in members]
            if prios != sorted(prios, reverse=True):
                out.append(f"waiters on {obj} not in priority order")
    for t in range(s.ntasks):
        if st.life(t) == BLOCKED and t not in seen:
            out.append(f"{s.unit_names[t]} blocked but on no waiter list")

    for qi, q in enumerate(s.queues):
        if len(st.queue_buffer(qi)) > q.capacity:
            out.append(f"queue {q.name} over capacity")
    for li, lk in enumerate(s.locks):
        n, h = st.lock_count(li), st.lock_holder(li)
        if not 0 <= n <= lk.max_count:
            out.append(f"lock {lk.name} count {n} outside 0..{lk.max_count}")
        if lk.mutex:
            if (n == 0) != (h != NONE):
                out.append(f"mutex {lk.name} count {n} disagrees with holder")
            waiting = [st.eff(w) for w in st.lock_waiters(li)]
            if h != NONE and waiting and st.eff(h) < max(waiting):
                out.append(f"mutex {lk.name} holder below its top waiter's priority")
    return out


def check_state(st: GlobalState) -> None:
    """Raise InvariantBroken listing every invariant ``st`` breaks."""
    bad = violations(st)
    if bad:
        raise InvariantBroken("; ".join(bad) + f"\n{st.describe()}")
