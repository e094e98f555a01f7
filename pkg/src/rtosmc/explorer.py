"""Explicit-state exploration: successors, safety search, liveness search, replay."""
from __future__ import annotations

import logging
import time
from array import array
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from . import hw, kernel
from ._kernels import scc_find_cycle
from .model import SYSTICK_LINE, GlobalState, System, Violation

log = logging.getLogger(__name__)

TAG_PLAIN = -1
TAG_TICK = -2

DEFAULT_MAX_STATES = 50_000_000
DEFAULT_MAX_DEPTH = 100_000


class LimitExceeded(Exception):
    def __init__(self, which: str, stats: "Stats"):
        super().__init__(f"{which} limit exceeded after {stats.states} states")
        self.which = which
        self.stats = stats


class DigestMismatch(Exception):
    def __init__(self, step: int, expected: str, got: str):
        super().__init__(f"step {step}: expected digest {expected}, replay produced {got}")
        self.step = step


@dataclass(frozen=True)
class Limits:
    max_states: int = DEFAULT_MAX_STATES
    max_depth: int = DEFAULT_MAX_DEPTH

    def __post_init__(self):
        if self.max_states <= 0 or self.max_depth <= 0:
            raise ValueError("limits must be positive")


@dataclass
class Transition:
    unit: int
    label: str
    tag: int
    state: Optional[GlobalState]
    violation: Optional[Violation] = None


@dataclass
class Step:
    i: int
    unit: int
    label: str
    digest: str
    violation: Optional[str] = None

    def to_json(self) -> dict:
        d = {"i": self.i, "unit": self.unit, "label": self.label, "digest": self.digest}
        if self.violation:
            d["violation"] = self.violation
        return d


@dataclass
class Trace:
    steps: list[Step] = field(default_factory=list)
    loop_start: Optional[int] = None

    def labels(self) -> list[str]:
        return [s.label for s in self.steps]

    def __len__(self):
        return len(self.steps)


@dataclass
class Stats:
    states: int = 0
    transitions: int = 0
    max_depth: int = 0
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return {"states": self.states, "transitions": self.transitions,
                "max_depth": self.max_depth, "seconds": round(self.seconds, 3)}


@dataclass
class Verdict:
    kind: str   # SafetyPass | SafetyFail | Deadlock | LivenessPass | LivenessFail | LimitExceeded
    stats: Stats
    trace: Optional[Trace] = None
    violation: Optional[str] = None
    starving: Optional[str] = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.kind in ("SafetyPass", "LivenessPass")

    @property
    def failed(self) -> bool:
        return self.kind in ("SafetyFail", "Deadlock", "LivenessFail")

    def short(self) -> str:
        if self.kind == "SafetyFail":
            return f"fail:{self.violation}"
        if self.kind == "LivenessFail":
            return f"fail:{self.starving}"
        if self.kind == "Deadlock":
            return "fail:deadlock"
        if self.kind == "LimitExceeded":
            return "inconclusive"
        return "pass"


# ---------------------------------------------------------------------------
# successor enumeration

def _annotate(sys: System, unit: int, kind: str, label: str, st: GlobalState) -> str:
    name = sys.unit_names[unit]
    if kind == "set_top":
        return f"{name}.set_top({sys.unit_names[st.v[sys.STACK + st.v[sys.SP] - 1]]})"
    if kind == "return":
        ep = st.v[sys.EP]
        if sys.is_handler(ep):
            return f"{name}.tailchain({sys.unit_names[ep]})"
        return f"{name}.return({sys.unit_names[ep]})"
    return f"{name}.{label}"


def successors(st: GlobalState, reverse: bool = False) -> list[Transition]:
    """Every transition enabled in ``st``.

    A pending, unmasked interrupt that may preempt the running unit is taken
    before that unit's next command, so the unit's command and an exception
    entry are never enabled together.  Only the arbitration winner enters.
    """
    s = st.sys
    v = st.v
    ep = v[s.EP]
    out: list[Transition] = []
    line = hw.arbitrate(st, ep)
    if line != -1:
        nst = st.copy()
        hw._entry(nst, line)
        unit = s.line_unit(line)
        out.append(Transition(unit, f"{s.unit_names[unit]}.entry", TAG_PLAIN, nst))
    else:
        prog = s.programs[ep]
        pc = v[s.PCS + ep]
        cmd = prog.commands[pc]
        if cmd.guard is None or cmd.guard(st, ep):
            nst = st.copy()
            try:
                nxt = cmd.action(nst, ep)
            except Violation as exc:
                out.append(Transition(ep, f"{s.unit_names[ep]}.{cmd.label}", TAG_PLAIN, None, exc))
            else:
                nst.v[s.PCS + ep] = cmd.next if nxt is None else prog.index[nxt]
                is_task = ep < s.ntasks
                if is_task:
                    nst.v[s.ARMED] = 1
                elif cmd.kind == "return" and nst.v[s.EP] < s.ntasks:
                    # a tick landing between the return and the task's first
                    # command is the same as one landing inside the handler,
                    # which the tail chain already covers
                    nst.v[s.ARMED] = 0
                tag = ep if (is_task and cmd.progress) else TAG_PLAIN
                out.append(Transition(ep, _annotate(s, ep, cmd.kind, cmd.label, nst), tag, nst))
    if not v[s.LINES + 2 * SYSTICK_LINE] and (v[s.ARMED] or not s.config.tick_gap):
        nst = st.copy()
        kernel._trigger(nst)
        out.append(Transition(s.systick, "SysTick.trigger", TAG_TICK, nst))
    if reverse:
        out.reverse()
    return out


def initial_state(sys: System) -> GlobalState:
    return sys.initial_state()


# ---------------------------------------------------------------------------
# safety

StateHook = Callable[[GlobalState], None]


def check_safety(sys: System, limits: Limits = Limits(), *, reverse: bool = False,
                 on_state: StateHook | None = None, exact: bool = True) -> Verdict:
    """Depth-first search for assertion violations and deadlocks."""
    t0 = time.perf_counter()
    stats = Stats()
    init = sys.initial_state()
    key_of = (lambda st: st.key) if exact else (lambda st: st.digest())
    ids = {key_of(init): 0}
    parent = array("i", [-1])
    plabel: list[str] = [""]
    punit = array("i", [-1])
    states = [init.key]
    if on_state:
        on_state(init)
    # (node, state, depth, iterator over pending successors)
    stack = [(0, init, 0, None)]
    try:
        while stack:
            node, st, depth, it = stack[-1]
            if it is None:
                succ = successors(st, reverse)
                if not succ:
                    stats.seconds = time.perf_counter() - t0
                    stats.states = len(states)
                    trace = _trace_from_tree(sys, states, parent, plabel, punit, node)
                    return Verdict("Deadlock", stats, trace,
                                   detail=f"no enabled transition at depth {depth}")
                it = iter(succ)
                stack[-1] = (node, st, depth, it)
            tr = next(it, None)
            if tr is None:
                stack.pop()
                continue
            stats.transitions += 1
            if tr.violation is not None:
                stats.seconds = time.perf_counter() - t0
                stats.states = len(states)
                trace = _trace_from_tree(sys, states, parent, plabel, punit, node)
                trace.steps.append(Step(len(trace.steps), tr.unit, tr.label, st.hexdigest(),
                                        tr.violation.kind))
                return Verdict("SafetyFail", stats, trace, violation=tr.violation.kind,
                               detail=tr.violation.detail)
            k = key_of(tr.state)
            if k in ids:
                continue
            nid = len(states)
            ids[k] = nid
            states.append(tr.state.key)
            parent.append(node)
            plabel.append(tr.label)
            punit.append(tr.unit)
            if on_state:
                on_state(tr.state)
            if nid >= limits.max_states:
                raise LimitExceeded("states", stats)
            if depth + 1 > stats.max_depth:
                stats.max_depth = depth + 1
                if stats.max_depth > limits.max_depth:
                    raise LimitExceeded("depth", stats)
            stack.append((nid, tr.state, depth + 1, None))
    except LimitExceeded as exc:
        stats.states = len(states)
        stats.seconds = time.perf_counter() - t0
        return Verdict("LimitExceeded", stats, detail=str(exc))
    stats.states = len(states)
    stats.seconds = time.perf_counter() - t0
    return Verdict("SafetyPass", stats)


def _trace_from_tree(sys, states, parent, plabel, punit, node) -> Trace:
    path = []
    while node > 0:
        path.append(node)
        node = parent[node]
    path.reverse()
    steps = []
    for i, n in enumerate(path):
        steps.append(Step(i, punit[n], plabel[n],
                          GlobalState.from_key(sys, states[n]).hexdigest()))
    return Trace(steps)


# ---------------------------------------------------------------------------
# state graph and liveness

@dataclass
class StateGraph:
    sys: System
    keys: list[bytes]
    offsets: array
    dst: array
    tag: array
    label: array
    labels: list[str]
    units: list[int]
    parent: array
    parent_edge: array
    stats: Stats
    deadlocks: list[int]

    @property
    def n(self) -> int:
        return len(self.keys)

    def edges(self, v: int) -> Iterator[tuple[int, int, int]]:
        for e in range(self.offsets[v], self.offsets[v + 1]):
            yield e, self.dst[e], self.tag[e]


def build_graph(sys: System, limits: Limits = Limits(), *, reverse: bool = False,
                on_state: StateHook | None = None) -> StateGraph:
    """Breadth-first construction of the full reachable transition graph.

    Transitions that violate an embedded check are dropped.
    """
    t0 = time.perf_counter()
    stats = Stats()
    init = sys.initial_state()
    ids = {init.key: 0}
    keys = [init.key]
    depth = array("i", [0])
    parent = array("i", [-1])
    parent_edge = array("i", [-1])
    offsets = array("i", [0])
    dst = array("i")
    tag = array("b")
    label = array("H")
    label_ids: dict[tuple[int, str], int] = {}
    labels: list[str] = []
    units: list[int] = []
    deadlocks = []
    if on_state:
        on_state(init)
    v = 0
    while v < len(keys):
        st = GlobalState.from_key(sys, keys[v])
        succ = successors(st, reverse)
        if not succ:
            deadlocks.append(v)
        for tr in succ:
            if tr.violation is not None:
                continue
            k = tr.state.key
            w = ids.get(k)
            if w is None:
                w = len(keys)
                ids[k] = w
                keys.append(k)
                d = depth[v] + 1
                depth.append(d)
                parent.append(v)
                parent_edge.append(len(dst))
                if on_state:
                    on_state(tr.state)
                if w >= limits.max_states:
                    stats.states = len(keys)
                    raise LimitExceeded("states", stats)
                if d > stats.max_depth:
                    stats.max_depth = d
                    if d > limits.max_depth:
                        stats.states = len(keys)
                        raise LimitExceeded("depth", stats)
            lk = (tr.unit, tr.label)
            li = label_ids.get(lk)
            if li is None:
                li = label_ids[lk] = len(labels)
                labels.append(tr.label)
                units.append(tr.unit)
            dst.append(w)
            tag.append(tr.tag)
            label.append(li)
        offsets.append(len(dst))
        v += 1
    stats.states = len(keys)
    stats.transitions = len(dst)
    stats.seconds = time.perf_counter() - t0
    return StateGraph(sys, keys, offsets, dst, tag, label, labels, units, parent,
                      parent_edge, stats, deadlocks)


def _edge_src(g: StateGraph, e: int) -> int:
    # offsets is sorted; binary search for the owning node
    lo, hi = 0, g.n
    while lo < hi:
        mid = (lo + hi) // 2
        if g.offsets[mid + 1] <= e:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _lasso(g: StateGraph, comp, edge: int, exclude: int) -> Trace:
    u = _edge_src(g, edge)
    v = g.dst[edge]
    c = comp[u]
    # stem: tree path from the initial state to u
    stem = []
    n = u
    while n > 0:
        stem.append(g.parent_edge[n])
        n = g.parent[n]
    stem.reverse()
    # loop: u -edge-> v, then back to u inside the component avoiding excluded edges
    back: list[int] = []
    if v != u:
        prev = {v: -1}
        q = deque([v])
        while q:
            x = q.popleft()
            if x == u:
                break
            for e, y, t in g.edges(x):
                if t == exclude or comp[y] != c or y in prev:
                    continue
                prev[y] = e
                q.append(y)
        x = u
        while x != v:
            e = prev[x]
            back.append(e)
            x = _edge_src(g, e)
        back.reverse()
    edges = stem + [edge] + back
    steps = []
    for i, e in enumerate(edges):
        d = g.dst[e]
        steps.append(Step(i, g.units[g.label[e]], g.labels[g.label[e]],
                          GlobalState.from_key(g.sys, g.keys[d]).hexdigest()))
    return Trace(steps, loop_start=len(stem))


def liveness_from_graph(g: StateGraph, tasks: list[int] | None = None) -> Verdict:
    """Look for a reachable cycle that ticks but never reaches some task's progress label."""
    t0 = time.perf_counter()
    sys = g.sys
    tasks = list(range(1, sys.ntasks)) if tasks is None else tasks
    for t in tasks:
        comp, edge = scc_find_cycle(g.n, g.offsets, g.dst, g.tag, t, TAG_TICK)
        if edge != -1:
            trace = _lasso(g, comp, edge, t)
            stats = Stats(g.stats.states, g.stats.transitions, g.stats.max_depth,
                          g.stats.seconds + time.perf_counter() - t0)
            return Verdict("LivenessFail", stats, trace, starving=sys.unit_names[t])
    stats = Stats(g.stats.states, g.stats.transitions, g.stats.max_depth,
                  g.stats.seconds + time.perf_counter() - t0)
    return Verdict("LivenessPass", stats)


def _path_to(g: StateGraph, node: int) -> Trace:
    edges = []
    while node > 0:
        edges.append(g.parent_edge[node])
        node = g.parent[node]
    edges.reverse()
    return Trace([Step(i, g.units[g.label[e]], g.labels[g.label[e]],
                       GlobalState.from_key(g.sys, g.keys[g.dst[e]]).hexdigest())
                  for i, e in enumerate(edges)])


def check_deadlock(sys: System, limits: Limits = Limits(), *, reverse: bool = False,
                   on_state: StateHook | None = None) -> Verdict:
    """Reachable states with no successor, ignoring embedded property checks."""
    try:
        g = build_graph(sys, limits, reverse=reverse, on_state=on_state)
    except LimitExceeded as exc:
        return Verdict("LimitExceeded", exc.stats, detail=str(exc))
    if g.deadlocks:
        first = min(g.deadlocks)
        return Verdict("Deadlock", g.stats, _path_to(g, first),
                       detail=f"{len(g.deadlocks)} deadlocked states")
    return Verdict("SafetyPass", g.stats)


def check_liveness(sys: System, limits: Limits = Limits(), *, reverse: bool = False,
                   on_state: StateHook | None = None) -> Verdict:
    try:
        g = build_graph(sys, limits, reverse=reverse, on_state=on_state)
    except LimitExceeded as exc:
        return Verdict("LimitExceeded", exc.stats, detail=str(exc))
    return liveness_from_graph(g)


# ---------------------------------------------------------------------------
# replay

def replay(trace: Trace, sys: System) -> list[GlobalState]:
    """Re-execute ``trace`` from the initial state, checking every digest.

    Returns the visited states, initial state first.  A step that recorded a
    violation must raise the same violation again; its state is not advanced.
    """
    st = sys.initial_state()
    out = [st]
    for step in trace.steps:
        match = None
        for tr in successors(st):
            if tr.label == step.label and tr.unit == step.unit:
                match = tr
                break
        if match is None:
            raise DigestMismatch(step.i, step.digest, "<no such transition>")
        if step.violation:
            if match.violation is None or match.violation.kind != step.violation:
                raise DigestMismatch(step.i, step.digest, "<violation not reproduced>")
            if st.hexdigest() != step.digest:
                raise DigestMismatch(step.i, step.digest, st.hexdigest())
            continue
        if match.violation is not None:
            raise DigestMismatch(step.i, step.digest, f"<unexpected {match.violation.kind}>")
        got = match.state.hexdigest()
        if got != step.digest:
            raise DigestMismatch(step.i, step.digest, got)
        st = match.state
        out.append(st)
    if trace.loop_start is not None:
        if out[trace.loop_start].hexdigest() != out[-1].hexdigest():
            raise DigestMismatch(len(trace.steps), out[trace.loop_start].hexdigest(),
                                 out[-1].hexdigest())
    return out
