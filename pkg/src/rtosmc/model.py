"""System layout, global state vector and execution-unit programs.

A :class:`System` is the compiled description of one application under one
configuration: which execution units exist, which IPC objects they share and
where every field lives inside the flat state vector.  A :class:`GlobalState`
is that vector.  Every slot holds a value in ``0..255`` so the canonical
encoding of a state is simply ``bytes(vector)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

from ._kernels import digest64

NONE = 255
FOREVER = 255

# task life states
READY = 0
RUNNING = 1
DELAYED = 2
SUSPENDED = 3
BLOCKED = 4

LIFE_NAMES = {READY: "Ready", RUNNING: "Running", DELAYED: "Delayed",
              SUSPENDED: "Suspended", BLOCKED: "Blocked"}

# IPC outcome slot values
NO_OUTCOME = 0
OK = 1
EXPIRED = 2

IDLE = 0
PENDSV_LINE = 0
SYSTICK_LINE = 1


class ModelError(Exception):
    """A configuration or model bug, never a modeled behavior."""


class StackOverflow(ModelError):
    pass


class StackUnderflow(ModelError):
    pass


class IllegalIdleBlock(ModelError):
    pass


class MutexGiveByNonHolder(ModelError):
    pass


class UnknownApp(ModelError):
    pass


class Violation(Exception):
    """Raised by a command whose embedded property check fails."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


class SchedKind(str, enum.Enum):
    COOPERATIVE = "cooperative"
    PREEMPTIVE_NO_SLICE = "preemptive"
    PREEMPTIVE_SLICE = "timeslice"

    @property
    def preemptive(self) -> bool:
        return self is not SchedKind.COOPERATIVE


POLICY_ALIASES = {
    "cooperative": SchedKind.COOPERATIVE,
    "coop": SchedKind.COOPERATIVE,
    "preemptive": SchedKind.PREEMPTIVE_NO_SLICE,
    "preemptive-no-slice": SchedKind.PREEMPTIVE_NO_SLICE,
    "preemptivenoslice": SchedKind.PREEMPTIVE_NO_SLICE,
    "timeslice": SchedKind.PREEMPTIVE_SLICE,
    "preemptive-slice": SchedKind.PREEMPTIVE_SLICE,
    "preemptiveslice": SchedKind.PREEMPTIVE_SLICE,
}


def parse_policy(name: str | SchedKind) -> SchedKind:
    if isinstance(name, SchedKind):
        return name
    try:
        return POLICY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}") from None


@dataclass(frozen=True)
class Policy:
    kind: SchedKind
    idle_yields: bool = True


@dataclass(frozen=True)
class Config:
    """Knobs that change the explored model."""

    policy: Policy
    waiter_order: str = "priority"   # or "fifo"
    stack_capacity: int = 4
    delay_max: int = 7
    tick_gap: bool = True
    with_check_task: bool = False
    fix_delays: bool = False
    overrides: tuple = ()

    def override(self, key: str, default):
        for k, v in self.overrides:
            if k == key:
                return v
        return default

    def as_dict(self) -> dict:
        return {
            "policy": self.policy.kind.value,
            "idle_yields": self.policy.idle_yields,
            "waiter_order": self.waiter_order,
            "stack_capacity": self.stack_capacity,
            "delay_max": self.delay_max,
            "tick_gap": self.tick_gap,
            "with_check_task": self.with_check_task,
            "fix_delays": self.fix_delays,
            "overrides": dict(self.overrides),
        }


def make_config(policy="cooperative", idle_yields=True, **kw) -> Config:
    return Config(Policy(parse_policy(policy), idle_yields), **kw)


# ---------------------------------------------------------------------------
# programs

Action = Callable[["GlobalState", int], Optional[str]]
Guard = Callable[["GlobalState", int], bool]


@dataclass
class Command:
    label: str
    action: Action
    guard: Optional[Guard] = None
    progress: bool = False
    kind: str = "cmd"
    next: int = -1


class Program:
    """A unit's behavior: a graph of guarded atomic commands.

    Each command runs atomically.  Its action mutates the state in place and
    returns the label of the next command, or ``None`` to fall through to the
    following one.  The last command falls through to the first (task loops
    never terminate).
    """

    def __init__(self, name: str):
        self.name = name
        self.commands: list[Command] = []
        self.index: dict[str, int] = {}

    def add(self, label: str, action: Action, *, guard: Guard | None = None,
            progress: bool = False, kind: str = "cmd") -> "Program":
        if label in self.index:
            raise ModelError(f"{self.name}: duplicate label {label!r}")
        self.index[label] = len(self.commands)
        self.commands.append(Command(label, action, guard, progress, kind))
        return self

    def seal(self) -> "Program":
        if not self.commands:
            raise ModelError(f"{self.name}: empty program")
        n = len(self.commands)
        for i, c in enumerate(self.commands):
            c.next = (i + 1) % n
        return self

    @property
    def progress_labels(self) -> list[str]:
        return [c.label for c in self.commands if c.progress]

    def kinds(self) -> list[str]:
        return [c.kind for c in self.commands]


@dataclass
class TaskSpec:
    name: str
    priority: int
    program: Program
    start_suspended: bool = False


@dataclass
class LineSpec:
    name: str
    priority: int
    program: Optional[Program] = None


@dataclass
class QueueSpec:
    name: str
    capacity: int
    initial: tuple = ()


@dataclass
class LockSpec:
    name: str
    max_count: int
    initial: int
    mutex: bool = False


@dataclass
class PropertyCheck:
    kind: str
    unit: str
    label: str
    predicate: Callable[["GlobalState", int], bool]
    description: str = ""


class System:
    """Static description of a model plus the offsets of its state vector."""

    def __init__(self, name: str, config: Config, tasks: list[TaskSpec], *,
                 queues: list[QueueSpec] = (), locks: list[LockSpec] = (),
                 variables: dict[str, int] | None = None,
                 extra_lines: list[LineSpec] = (), idle_program: Program | None = None,
                 checks: list[PropertyCheck] = (), properties: frozenset = frozenset(),
                 masked_lines: frozenset = frozenset()):
        from . import kernel  # builtin handler and idle programs

        self.name = name
        self.config = config
        self.policy = config.policy
        self.properties = frozenset(properties)
        self.checks = list(checks)
        idle = TaskSpec("idle", 0, idle_program or kernel.idle_program(config))
        self.tasks: list[TaskSpec] = [idle, *tasks]
        self.ntasks = len(self.tasks)
        self.lines: list[LineSpec] = [
            LineSpec("PendSV", 15, kernel.pendsv_program()),
            LineSpec("SysTick", 15, kernel.systick_program()),
            *extra_lines,
        ]
        for ln in self.lines:
            if ln.program is None:
                raise ModelError(f"line {ln.name} has no handler program")
        self.nlines = len(self.lines)
        self.masked_lines = frozenset(masked_lines)
        unknown = self.masked_lines - {ln.name for ln in self.lines}
        if unknown:
            raise ModelError(f"cannot mask unknown lines {sorted(unknown)}")
        self.queues = list(queues)
        self.locks = list(locks)
        self.variables = dict(variables or {})
        self.var_names = list(self.variables)

        self.programs: list[Program] = [t.program for t in self.tasks] + [
            ln.program for ln in self.lines]
        self.unit_names = [t.name for t in self.tasks] + [ln.name for ln in self.lines]
        self.nunits = len(self.programs)
        for p in self.programs:
            if p.commands and p.commands[-1].next == -1:
                p.seal()
        self.base_priority = [t.priority for t in self.tasks]
        if self.base_priority[IDLE] != 0:
            raise ModelError("idle task must have priority 0")
        self.max_priority = max(self.base_priority)
        self.line_priority = [ln.priority for ln in self.lines]

        # layout
        off = 0
        self.EP = off; off += 1
        self.SP = off; off += 1
        self.STACK = off; off += config.stack_capacity
        self.ARMED = off; off += 1
        self.LINES = off; off += 2 * self.nlines
        self.TASKS = off; off += 6 * self.ntasks
        self.PCS = off; off += self.nunits
        self.RR = off; off += self.max_priority + 1
        self.QUEUES = []
        for q in self.queues:
            self.QUEUES.append(off)
            off += 1 + q.capacity + 2 * (1 + self.ntasks)
        self.LOCKS = []
        for lk in self.locks:
            self.LOCKS.append(off)
            off += 3 + self.ntasks
        self.VARS = off; off += len(self.var_names)
        self.size = off
        self._var_index = {n: self.VARS + i for i, n in enumerate(self.var_names)}
        self._queue_index = {q.name: i for i, q in enumerate(self.queues)}
        self._lock_index = {lk.name: i for i, lk in enumerate(self.locks)}
        self._task_index = {t.name: i for i, t in enumerate(self.tasks)}

    # ids -----------------------------------------------------------------
    def line_unit(self, line: int) -> int:
        return self.ntasks + line

    def unit_line(self, unit: int) -> int:
        return unit - self.ntasks

    def is_task(self, unit: int) -> bool:
        return 0 <= unit < self.ntasks

    def is_handler(self, unit: int) -> bool:
        return self.ntasks <= unit < self.nunits

    @property
    def pendsv(self) -> int:
        return self.line_unit(PENDSV_LINE)

    @property
    def systick(self) -> int:
        return self.line_unit(SYSTICK_LINE)

    def task_id(self, name: str) -> int:
        return self._task_index[name]

    def queue_id(self, name: str) -> int:
        return self._queue_index[name]

    def lock_id(self, name: str) -> int:
        return self._lock_index[name]

    def object_id(self, kind: str, idx: int) -> int:
        """Global IPC object number stored in a blocked task's record."""
        return idx if kind == "q" else len(self.queues) + idx

    def var_slot(self, name: str) -> int:
        return self._var_index[name]

    def progress_commands(self) -> dict[int, set[int]]:
        """Map task id to the pcs of its progress-labelled commands."""
        return {t: {i for i, c in enumerate(self.programs[t].commands) if c.progress}
                for t in range(1, self.ntasks)}

    # initial state ---------------------------------------------------------
    def initial_state(self) -> "GlobalState":
        v = [0] * self.size
        cap = self.config.stack_capacity
        for i in range(cap):
            v[self.STACK + i] = NONE
        v[self.SP] = 0
        v[self.ARMED] = 1
        for t in range(self.ntasks):
            o = self.TASKS + 6 * t
            v[o] = SUSPENDED if self.tasks[t].start_suspended else READY
            v[o + 1] = 0
            v[o + 2] = NONE
            v[o + 3] = self.base_priority[t]
            v[o + 4] = NO_OUTCOME
            v[o + 5] = 0
        for p in range(self.max_priority + 1):
            v[self.RR + p] = NONE
        for qi, q in enumerate(self.queues):
            o = self.QUEUES[qi]
            v[o] = len(q.initial)
            for j in range(q.capacity):
                v[o + 1 + j] = q.initial[j] if j < len(q.initial) else NONE
            s = o + 1 + q.capacity
            v[s] = 0
            for j in range(self.ntasks):
                v[s + 1 + j] = NONE
            r = s + 1 + self.ntasks
            v[r] = 0
            for j in range(self.ntasks):
                v[r + 1 + j] = NONE
        for li, lk in enumerate(self.locks):
            o = self.LOCKS[li]
            v[o] = lk.initial
            v[o + 1] = NONE
            v[o + 2] = 0
            for j in range(self.ntasks):
                v[o + 3 + j] = NONE
        for i, n in enumerate(self.var_names):
            v[self.VARS + i] = self.variables[n]
        for ln, spec in enumerate(self.lines):
            v[self.LINES + 2 * ln + 1] = int(spec.name in self.masked_lines)
        st = GlobalState(self, v)
        # the scheduler starts by electing the first task, like vTaskStartScheduler
        from . import kernel
        first = kernel.next_task_id(st)
        st.set_rr(self.base_priority[first], first)
        st.set_life(first, RUNNING)
        v[self.EP] = first
        return st


class GlobalState:
    """Flat, canonically encoded snapshot of the whole model."""

    __slots__ = ("sys", "v")

    def __init__(self, sys: System, v: list[int]):
        self.sys = sys
        self.v = v

    def copy(self) -> "GlobalState":
        return GlobalState(self.sys, self.v[:])

    @property
    def key(self) -> bytes:
        return bytes(self.v)

    def digest(self) -> int:
        return digest64(bytes(self.v))

    def hexdigest(self) -> str:
        return f"{self.digest():016x}"

    @classmethod
    def from_key(cls, sys: System, key: bytes) -> "GlobalState":
        return cls(sys, list(key))

    def __eq__(self, other):
        return isinstance(other, GlobalState) and self.v == other.v

    def __hash__(self):
        return hash(bytes(self.v))

    # kernel registers ------------------------------------------------------
    @property
    def ep(self) -> int:
        return self.v[self.sys.EP]

    @ep.setter
    def ep(self, unit: int) -> None:
        self.v[self.sys.EP] = unit

    @property
    def stack(self) -> tuple:
        s = self.sys
        return tuple(self.v[s.STACK:s.STACK + self.v[s.SP]])

    @property
    def armed(self) -> bool:
        return bool(self.v[self.sys.ARMED])

    def pending(self, line: int) -> bool:
        return bool(self.v[self.sys.LINES + 2 * line])

    def set_pending(self, line: int, value: bool = True) -> None:
        self.v[self.sys.LINES + 2 * line] = int(value)

    def masked(self, line: int) -> bool:
        return bool(self.v[self.sys.LINES + 2 * line + 1])

    def set_masked(self, line: int, value: bool = True) -> None:
        self.v[self.sys.LINES + 2 * line + 1] = int(value)

    def pc(self, unit: int) -> int:
        return self.v[self.sys.PCS + unit]

    def set_pc(self, unit: int, pc: int) -> None:
        self.v[self.sys.PCS + unit] = pc

    def rr(self, prio: int) -> int:
        return self.v[self.sys.RR + prio]

    def set_rr(self, prio: int, task: int) -> None:
        self.v[self.sys.RR + prio] = task

    # task records ------------------------------------------------------------
    def life(self, t: int) -> int:
        return self.v[self.sys.TASKS + 6 * t]

    def set_life(self, t: int, life: int, counter: int = 0, obj: int = NONE) -> None:
        o = self.sys.TASKS + 6 * t
        self.v[o] = life
        self.v[o + 1] = counter
        self.v[o + 2] = obj

    def counter(self, t: int) -> int:
        return self.v[self.sys.TASKS + 6 * t + 1]

    def set_counter(self, t: int, c: int) -> None:
        self.v[self.sys.TASKS + 6 * t + 1] = c

    def blocked_on(self, t: int) -> int:
        return self.v[self.sys.TASKS + 6 * t + 2]

    def eff(self, t: int) -> int:
        return self.v[self.sys.TASKS + 6 * t + 3]

    def set_eff(self, t: int, p: int) -> None:
        self.v[self.sys.TASKS + 6 * t + 3] = p

    def outcome(self, t: int) -> int:
        return self.v[self.sys.TASKS + 6 * t + 4]

    def set_outcome(self, t: int, o: int) -> None:
        self.v[self.sys.TASKS + 6 * t + 4] = o

    def msg(self, t: int) -> int:
        return self.v[self.sys.TASKS + 6 * t + 5]

    def set_msg(self, t: int, m: int) -> None:
        self.v[self.sys.TASKS + 6 * t + 5] = m

    def current_task(self) -> int:
        """The task that owns the processor: EP itself, or the interrupted task."""
        ep = self.ep
        if self.sys.is_task(ep):
            return ep
        s = self.sys
        return self.v[s.STACK] if self.v[s.SP] else NONE

    # app variables -------------------------------------------------------------
    def var(self, name: str) -> int:
        return self.v[self.sys._var_index[name]]

    def set_var(self, name: str, value: int) -> None:
        if not 0 <= value < NONE:
            raise ModelError(f"variable {name} out of range: {value}")
        self.v[self.sys._var_index[name]] = value

    # views ---------------------------------------------------------------------
    def queue_buffer(self, qi: int) -> tuple:
        o = self.sys.QUEUES[qi]
        return tuple(self.v[o + 1:o + 1 + self.v[o]])

    def queue_waiters(self, qi: int, direction: str) -> tuple:
        o = self.sys.QUEUES[qi]
        cap = self.sys.queues[qi].capacity
        s = o + 1 + cap
        if direction == "recv":
            s += 1 + self.sys.ntasks
        return tuple(self.v[s + 1:s + 1 + self.v[s]])

    def lock_count(self, li: int) -> int:
        return self.v[self.sys.LOCKS[li]]

    def lock_holder(self, li: int) -> int:
        return self.v[self.sys.LOCKS[li] + 1]

    def lock_waiters(self, li: int) -> tuple:
        o = self.sys.LOCKS[li]
        return tuple(self.v[o + 3:o + 3 + self.v[o + 2]])

    def describe(self) -> dict:
        s = self.sys
        return {
            "ep": s.unit_names[self.ep],
            "stack": [s.unit_names[u] for u in self.stack],
            "pending": {ln.name: self.pending(i) for i, ln in enumerate(s.lines)},
            "tasks": {
                t.name: {
                    "life": LIFE_NAMES[self.life(i)],
                    "counter": self.counter(i),
                    "eff": self.eff(i),
                    "pc": s.programs[i].commands[self.pc(i)].label,
                }
                for i, t in enumerate(s.tasks)
            },
            "queues": {q.name: list(self.queue_buffer(i)) for i, q in enumerate(s.queues)},
            "locks": {lk.name: self.lock_count(i) for i, lk in enumerate(s.locks)},
            "vars": {n: self.var(n) for n in s.var_names},
        }
