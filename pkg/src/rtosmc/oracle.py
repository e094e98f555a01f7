"""Brute-force reference semantics for tiny systems.

This module re-implements the scheduler and interrupt rules directly on
small tuples, without sharing code with :mod:`rtosmc.hw`, :mod:`rtosmc.kernel`
or :mod:`rtosmc.explorer`.  It enumerates the whole transition graph into a
plain dictionary and answers reachability, deadlock and starvation questions
with textbook graph searches.  The engine is validated by comparing its
answers with these on toy systems.

A toy task is a list of operations run in a loop:

``"work"``      do nothing
``"yield"``     request a context switch
``"delay N"``   sleep for N ticks
``"halt"``      a command whose guard is never true

The last operation of each task is its progress location.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import (DELAYED, READY, RUNNING, GlobalState, Program, SchedKind, System, TaskSpec,
                    make_config, parse_policy)

PENDSV, SYSTICK = 0, 1   # line indices, in arbitration order


@dataclass(frozen=True)
class Toy:
    name: str
    policy: str
    tasks: tuple = ()           # (name, priority, (op, ...)) per task
    idle_yields: bool = True
    tick_gap: bool = True
    mask_systick: bool = False
    delay_max: int = 7

    @property
    def kind(self) -> SchedKind:
        return parse_policy(self.policy)

    def to_system(self) -> System:
        """The same toy expressed for the main engine."""
        specs = []
        for name, prio, ops in self.tasks:
            p = Program(name)
            for i, op in enumerate(ops):
                p.add(f"{i}_{op.replace(' ', '')}", _engine_action(op),
                      guard=(lambda st, t: False) if op == "halt" else None,
                      progress=i == len(ops) - 1)
            specs.append(TaskSpec(name, prio, p.seal()))
        cfg = make_config(self.policy, idle_yields=self.idle_yields, tick_gap=self.tick_gap,
                          delay_max=self.delay_max)
        return System(self.name, cfg, specs,
                      masked_lines=frozenset({"SysTick"}) if self.mask_systick else frozenset())


def _engine_action(op: str):
    from . import kernel

    if op == "yield":
        return lambda st, t: kernel.do_yield(st, t)
    if op.startswith("delay"):
        n = int(op.split()[1])
        return lambda st, t: kernel.do_delay(st, t, n)
    return lambda st, t: None


class OState(NamedTuple):
    ep: int
    stack: tuple
    armed: bool
    pending: tuple      # per line
    pcs: tuple          # per unit
    life: tuple         # per task, idle first
    counter: tuple      # per task
    rr: tuple           # last elected task per priority, -1 if none


@dataclass
class OracleResult:
    states: list[OState]
    edges: list[list[tuple[int, str, int]]]   # per state: (target, kind, task) ; kind in work/tick/plain
    deadlocks: list[int]
    starving: list[str] = field(default_factory=list)
    truncated: bool = False


class _Sem:
    """Transition rules for one toy."""

    def __init__(self, toy: Toy):
        self.toy = toy
        self.ops = [("idle_loop",)] + [tuple(ops) for _, _, ops in toy.tasks]
        self.prio = [0] + [p for _, p, _ in toy.tasks]
        self.n = len(self.prio)
        self.pendsv = self.n
        self.systick = self.n + 1
        self.nprio = max(self.prio) + 1
        self.kind = toy.kind

    def initial(self) -> OState:
        life = [READY] * self.n
        rr = [-1] * self.nprio
        first = self._elect(life, rr)
        life[first] = RUNNING
        rr[self.prio[first]] = first
        return OState(first, (), True, (False, False), (0,) * (self.n + 2), tuple(life),
                      (0,) * self.n, tuple(rr))

    def _elect(self, life, rr) -> int:
        live = [t for t in range(self.n) if life[t] in (READY, RUNNING)]
        top = max(self.prio[t] for t in live)
        last = rr[top]
        order = list(range(last + 1, self.n)) + list(range(0, last + 1))
        return next(t for t in order if t in live and self.prio[t] == top)

    def _current_task(self, s: OState) -> int:
        return s.ep if s.ep < self.n else s.stack[0]

    def _may_enter(self, s: OState, line: int) -> bool:
        if not s.pending[line] or (line == SYSTICK and self.toy.mask_systick):
            return False
        # both lines share one urgency level, so only thread mode can be preempted
        return s.ep < self.n

    def successors(self, s: OState) -> list[tuple[OState, str, int]]:
        out = []
        entering = [ln for ln in (PENDSV, SYSTICK) if self._may_enter(s, ln)]
        if entering:
            ln = entering[0]
            unit = self.pendsv if ln == PENDSV else self.systick
            pend = list(s.pending)
            pend[ln] = False
            pcs = list(s.pcs)
            pcs[unit] = 0
            out.append((s._replace(ep=unit, stack=s.stack + (s.ep,), pending=tuple(pend),
                                   pcs=tuple(pcs)), "plain", -1))
        else:
            nxt = self._command(s)
            if nxt is not None:
                out.append(nxt)
        if not s.pending[SYSTICK] and (s.armed or not self.toy.tick_gap):
            pend = list(s.pending)
            pend[SYSTICK] = True
            out.append((s._replace(pending=tuple(pend), armed=False), "tick", -1))
        return out

    def _command(self, s: OState):
        u = s.ep
        life = list(s.life)
        counter = list(s.counter)
        pend = list(s.pending)
        pcs = list(s.pcs)
        rr = list(s.rr)
        if u < self.n:
            ops = self.ops[u]
            pc = s.pcs[u]
            op = ops[pc]
            if op == "halt":
                return None
            if u == 0:
                if self.kind is SchedKind.COOPERATIVE:
                    pend[PENDSV] = True
                elif self.toy.idle_yields and any(
                        life[t] == READY and self.prio[t] == 0 for t in range(1, self.n)):
                    pend[PENDSV] = True
            elif op == "yield":
                pend[PENDSV] = True
            elif op.startswith("delay"):
                k = int(op.split()[1])
                if k > 0:
                    life[u] = DELAYED
                    counter[u] = min(k, self.toy.delay_max)
                pend[PENDSV] = True
            pcs[u] = (pc + 1) % len(ops)
            progress = u > 0 and pc == len(ops) - 1
            ns = OState(s.ep, s.stack, True, tuple(pend), tuple(pcs), tuple(life),
                        tuple(counter), tuple(rr))
            return ns, "work" if progress else "plain", u if progress else -1

        pc = s.pcs[u]
        if pc == 1:
            return self._return(s), "plain", -1
        pcs[u] = 1
        if u == self.pendsv:
            for t in range(self.n):
                if life[t] == RUNNING:
                    life[t] = READY
            e = self._elect(life, rr)
            rr[self.prio[e]] = e
            stack = s.stack[:-1] + (e,)
            return (OState(u, stack, s.armed, tuple(pend), tuple(pcs), tuple(life),
                           tuple(counter), tuple(rr)), "plain", -1)
        woken = []
        for t in range(1, self.n):
            if life[t] == DELAYED:
                counter[t] -= 1
                if counter[t] <= 0:
                    counter[t] = 0
                    life[t] = READY
                    woken.append(t)
        if self.kind is not SchedKind.COOPERATIVE:
            cur = self._current_task(s)
            if any(self.prio[t] >= self.prio[cur] for t in woken):
                pend[PENDSV] = True
            if self.kind is SchedKind.PREEMPTIVE_SLICE:
                pend[PENDSV] = True
        return (OState(u, s.stack, s.armed, tuple(pend), tuple(pcs), tuple(life),
                       tuple(counter), tuple(rr)), "plain", -1)

    def _return(self, s: OState) -> OState:
        top = s.stack[-1]
        pend = list(s.pending)
        pcs = list(s.pcs)
        pcs[s.ep] = 0    # the handler program starts over on its next entry
        if top < self.n:
            for ln in (PENDSV, SYSTICK):
                if pend[ln] and not (ln == SYSTICK and self.toy.mask_systick):
                    pend[ln] = False
                    unit = self.pendsv if ln == PENDSV else self.systick
                    pcs[unit] = 0
                    return s._replace(ep=unit, pending=tuple(pend), pcs=tuple(pcs))
        life = list(s.life)
        if top < self.n and life[top] == READY:
            life[top] = RUNNING
        armed = s.armed and not (top < self.n and self.toy.tick_gap)
        return s._replace(ep=top, stack=s.stack[:-1], life=tuple(life), armed=armed,
                          pcs=tuple(pcs))


def explore(toy: Toy, max_states: int = 200_000) -> OracleResult:
    """Breadth-first enumeration of the toy's full transition graph."""
    sem = _Sem(toy)
    init = sem.initial()
    index = {init: 0}
    states = [init]
    edges: list[list[tuple[int, str, int]]] = []
    queue = deque([init])
    truncated = False
    while queue:
        s = queue.popleft()
        row = []
        for ns, kind, task in sem.successors(s):
            if ns not in index:
                if len(states) >= max_states:
                    truncated = True
                    continue
                index[ns] = len(states)
                states.append(ns)
                queue.append(ns)
            row.append((index[ns], kind, task))
        edges.append(row)
    deadlocks = [i for i, row in enumerate(edges) if not row]
    res = OracleResult(states, edges, deadlocks, truncated=truncated)
    res.starving = [name for t, (name, _, _) in enumerate(toy.tasks, start=1)
                    if _starves(res, t)]
    return res


def _reaches(edges, src: int, dst: int, skip_task: int) -> bool:
    seen = {src}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        if x == dst:
            return True
        for y, kind, task in edges[x]:
            if (kind == "work" and task == skip_task) or y in seen:
                continue
            seen.add(y)
            queue.append(y)
    return False


def _starves(res: OracleResult, t: int) -> bool:
    """Some reachable cycle contains a tick but no progress step of task ``t``."""
    for x, row in enumerate(res.edges):
        for y, kind, _ in row:
            if kind == "tick" and _reaches(res.edges, y, x, t):
                return True
    return False


def encode(toy: Toy, system: System, s: OState) -> bytes:
    """Canonical engine encoding of an oracle state, for set comparison."""
    st = system.initial_state()
    v = st.v
    v[system.EP] = s.ep
    cap = system.config.stack_capacity
    for i in range(cap):
        v[system.STACK + i] = s.stack[i] if i < len(s.stack) else 255
    v[system.SP] = len(s.stack)
    v[system.ARMED] = int(s.armed)
    for ln in (PENDSV, SYSTICK):
        st.set_pending(ln, s.pending[ln])
    for u, pc in enumerate(s.pcs):
        st.set_pc(u, pc)
    for t in range(len(s.life)):
        st.set_life(t, s.life[t], s.counter[t])
    for p, r in enumerate(s.rr):
        st.set_rr(p, 255 if r == -1 else r)
    return GlobalState(system, v).key


def brute_force_oracle(toy: Toy, max_states: int = 200_000) -> dict:
    """Reachable encoded states plus verdicts, in a form easy to compare."""
    res = explore(toy, max_states)
    system = toy.to_system()
    return {
        "states": {encode(toy, system, s) for s in res.states},
        "deadlock": bool(res.deadlocks),
        "starving": sorted(res.starving),
        "truncated": res.truncated,
    }


TOYS: tuple[Toy, ...] = (
    Toy("hog-coop", "cooperative", (("A", 1, ("work",)), ("B", 1, ("work", "yield")))),
    Toy("yield-coop", "cooperative", (("A", 1, ("work", "yield")), ("B", 1, ("work", "yield")))),
    Toy("single-tick", "preemptive", (("A", 1, ("work", "delay 2")),)),
    Toy("pair-noslice", "preemptive", (("A", 1, ("work", "yield")), ("B", 1, ("work", "yield")))),
    Toy("pair-slice", "timeslice", (("A", 1, ("work", "yield")), ("B", 1, ("work", "yield")))),
    Toy("idle-level", "timeslice", (("A", 0, ("work", "delay 3")),)),
    Toy("masked-halt", "preemptive", (("A", 1, ("halt",)),), mask_systick=True),
    Toy("no-gap", "timeslice", (("A", 1, ("work",)),), tick_gap=False),
)
