"""Building blocks for task programs.

Each helper returns an action ``f(state, task) -> next_label | None`` suitable
for :meth:`Program.add`.  Actions mutate the state they are handed.
"""
from __future__ import annotations

from typing import Callable

from .. import ipc, kernel
from ..model import (EXPIRED, FOREVER, OK, GlobalState, Program, PropertyCheck, SchedKind,
                     Violation)

Expr = Callable[[GlobalState, int], int]


def const(x: int) -> Expr:
    return lambda st, t: x


def var(name: str) -> Expr:
    return lambda st, t: st.var(name)


def seq(*actions):
    """Run several actions as one atomic command; the last label returned wins."""
    def run(st, t):
        nxt = None
        for a in actions:
            r = a(st, t)
            if r is not None:
                nxt = r
        return nxt
    return run


def nop(st, t):
    return None


def goto(label: str):
    return lambda st, t: label


def yield_(st, t):
    kernel.do_yield(st, t)


def coop_yield(st, t):
    """Yield only under cooperative scheduling; extra yield for apps that need one there."""
    if st.sys.policy.kind is SchedKind.COOPERATIVE:
        kernel.do_yield(st, t)


def delay(ticks: int, clamp: bool = True):
    return lambda st, t: kernel.do_delay(st, t, ticks, clamp)


def suspend(st, t):
    kernel.do_suspend(st, t)


def suspend_other(target: str):
    def run(st, t):
        kernel.do_suspend_other(st, t, st.sys.task_id(target))
    return run


def resume(target: str):
    def run(st, t):
        kernel.do_resume(st, t, st.sys.task_id(target))
    return run


def send(queue: str, msg: Expr, delay: int):
    def run(st, t):
        ipc.send(st, st.sys.queue_id(queue), t, msg(st, t), delay)
    return run


def receive(queue: str, delay: int):
    def run(st, t):
        ipc.receive(st, st.sys.queue_id(queue), t, delay)
    return run


def peek(queue: str, delay: int):
    def run(st, t):
        ipc.peek(st, st.sys.queue_id(queue), t, delay)
    return run


def take(lock: str, delay: int):
    def run(st, t):
        ipc.take(st, st.sys.lock_id(lock), t, delay)
    return run


def give(lock: str):
    def run(st, t):
        ipc.give(st, st.sys.lock_id(lock), t)
    return run


def set_var(name: str, value: Expr):
    def run(st, t):
        st.set_var(name, value(st, t))
    return run


def incr(name: str, modulus: int):
    def run(st, t):
        st.set_var(name, (st.var(name) + 1) % modulus)
    return run


def when(cond: Callable[[GlobalState, int], bool], then, otherwise=nop):
    def run(st, t):
        return then(st, t) if cond(st, t) else otherwise(st, t)
    return run


def ok(st, t) -> bool:
    return st.outcome(t) == OK


def failed(st, t) -> bool:
    return st.outcome(t) == EXPIRED


def got(st, t) -> int:
    return st.msg(t)


def check(prop: PropertyCheck):
    """Fail with ``prop.kind`` unless the predicate holds."""
    def run(st, t):
        if not prop.predicate(st, t):
            raise Violation(prop.kind, f"{prop.unit}:{prop.label} {prop.description}".strip())
    return run


class TaskBuilder:
    """Collects a task's commands together with the property checks they embed."""

    def __init__(self, name: str, checks: list[PropertyCheck]):
        self.program = Program(name)
        self.name = name
        self._checks = checks

    def cmd(self, label: str, *actions, progress: bool = False, kind: str = "cmd",
            guard=None) -> "TaskBuilder":
        action = actions[0] if len(actions) == 1 else seq(*actions)
        self.program.add(label, action, progress=progress, kind=kind, guard=guard)
        return self

    def prop(self, kind: str, label: str, predicate, description: str = "") -> PropertyCheck:
        pc = PropertyCheck(kind, self.name, label, predicate, description)
        self._checks.append(pc)
        return pc

    def build(self) -> Program:
        return self.program.seal()


__all__ = [
    "FOREVER", "TaskBuilder", "check", "const", "coop_yield", "delay", "failed", "give", "got", "goto",
    "incr", "nop", "ok", "peek", "receive", "resume", "send", "seq", "set_var", "suspend", "suspend_other",
    "take", "var", "when", "yield_",
]
