"""Cortex-M style interrupt lines: arbitration, exception entry/return, tail chaining.

Functions prefixed with an underscore mutate the state they are given; the
public ones copy first and are pure.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import NONE, READY, RUNNING, GlobalState, StackOverflow, StackUnderflow, System


@dataclass(frozen=True)
class InterruptLine:
    id: int
    pending: bool
    masked: bool
    priority: int


def line_view(st: GlobalState, line: int) -> InterruptLine:
    s = st.sys
    return InterruptLine(s.line_unit(line), st.pending(line), st.masked(line),
                         s.line_priority[line])


def prioritizing(sys: System, line: int, current: int) -> bool:
    """Whether ``line`` may preempt the unit ``current``.

    Tasks run in thread mode and are preempted by any interrupt.  A handler is
    preempted only by a strictly more urgent line, so a handler never
    preempts itself.
    """
    if sys.is_task(current):
        return True
    return sys.line_priority[line] < sys.line_priority[sys.unit_line(current)]


def entry_guard(st: GlobalState, line: int) -> bool:
    return st.pending(line) and not st.masked(line) and prioritizing(st.sys, line, st.ep)


def arbitrate(st: GlobalState, against: int) -> int:
    """Most urgent pending, unmasked line that may preempt ``against``; -1 if none.

    Equal urgency goes to the lowest unit id.
    """
    s = st.sys
    v = st.v
    best = -1
    best_prio = 1 << 30
    base = s.LINES
    for ln in range(s.nlines):
        if v[base + 2 * ln] and not v[base + 2 * ln + 1]:
            p = s.line_priority[ln]
            if p < best_prio and prioritizing(s, ln, against):
                best, best_prio = ln, p
    return best


def _entry(st: GlobalState, line: int) -> None:
    s = st.sys
    v = st.v
    sp = v[s.SP]
    if sp >= s.config.stack_capacity:
        raise StackOverflow(f"exception stack full entering {s.lines[line].name}")
    v[s.STACK + sp] = v[s.EP]
    v[s.SP] = sp + 1
    v[s.LINES + 2 * line] = 0
    unit = s.line_unit(line)
    v[s.EP] = unit
    v[s.PCS + unit] = 0


def _return(st: GlobalState) -> Optional[int]:
    """Exception return with tail chaining.  Returns the chained line or None."""
    s = st.sys
    v = st.v
    sp = v[s.SP]
    if sp == 0:
        raise StackUnderflow("exception return with empty stack")
    top = v[s.STACK + sp - 1]
    chained = arbitrate(st, top)
    if chained != -1:
        v[s.LINES + 2 * chained] = 0
        unit = s.line_unit(chained)
        v[s.EP] = unit
        v[s.PCS + unit] = 0
        return chained
    v[s.STACK + sp - 1] = NONE
    v[s.SP] = sp - 1
    v[s.EP] = top
    if s.is_task(top) and st.life(top) == READY:
        st.v[s.TASKS + 6 * top] = RUNNING
    return None


def exception_entry(state: GlobalState, line: int) -> GlobalState:
    st = state.copy()
    _entry(st, line)
    return st


def exception_return(state: GlobalState) -> GlobalState:
    st = state.copy()
    _return(st)
    return st


def irq_step(state: GlobalState, line: int) -> Optional[GlobalState]:
    """Fire ``line`` if its entry guard holds, else None (transition disabled)."""
    if not entry_guard(state, line):
        return None
    return exception_entry(state, line)


def _mask(st: GlobalState, line: int, value: bool) -> None:
    st.set_masked(line, value)
