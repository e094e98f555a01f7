"""Semtest: two pairs of tasks each guarding a shared variable with a binary semaphore.

The polling pair sits at the idle priority and calls take(0), yielding only
when the semaphore is unavailable.  After a successful round it loops
straight back, so nothing else gets the processor unless the scheduler
slices time.  The blocking pair runs one level higher, waits on take with a
timeout and delays between rounds.

Checks:
  S4  inside the critical section the shared variable still holds the owner's mark.
  S2  a give by the current owner is accepted.
  S1  a blocking take never times out (the owner always releases in time).
  S0  a blocking task's mark is gone from the shared variable when its delay ends.
"""
from ..model import OK, LockSpec, System, TaskSpec
from .dsl import (TaskBuilder, check, delay, failed, give, goto, ok, seq, set_var, take,
                  when, yield_)

NAME = "Semtest"
PROPERTIES = frozenset({"S0", "S1", "S2", "S4"})
STARRED = False


def _critical(b: TaskBuilder, sem: str, shared: str, mark: int, first: str, after: str):
    s4 = b.prop("S4", first + "_check", lambda st, t: st.var(shared) == mark,
                "another task entered the critical section")
    s2 = b.prop("S2", first + "_give", lambda st, t: st.outcome(t) == OK,
                "owner's give was refused")
    b.cmd(first + "_enter", set_var(shared, lambda st, t: mark))
    b.cmd(first + "_check", check(s4), set_var(shared, lambda st, t: 0))
    b.cmd(first + "_give", give(sem), check(s2), goto(after))


def _poller(name: str, mark: int, checks) -> TaskBuilder:
    b = TaskBuilder(name, checks)
    b.cmd("take", take("sem1", 0), when(failed, seq(yield_, goto("take"))), progress=True)
    _critical(b, "sem1", "shared1", mark, "cs", "take")
    return b


def _blocker(name: str, mark: int, pause: int, timeout: int,
             checks) -> TaskBuilder:
    b = TaskBuilder(name, checks)
    s1 = b.prop("S1", "take", ok, "take timed out")
    s0 = b.prop("S0", "wake", lambda st, t: st.var("shared2") != mark,
                "own critical section still open after the delay")
    b.cmd("wake", check(s0), progress=True)
    b.cmd("take", take("sem2", timeout))
    b.cmd("got", check(s1))
    _critical(b, "sem2", "shared2", mark, "cs", "rest")
    b.cmd("rest", delay(pause), goto("wake"))
    return b


def build(config) -> System:
    pause = config.override("semtest.delay", 7)
    timeout = config.override("semtest.timeout", 7)
    checks = []
    tasks = [
        TaskSpec("poll1", 0, _poller("poll1", 1, checks).build()),
        TaskSpec("poll2", 0, _poller("poll2", 2, checks).build()),
        TaskSpec("block1", 1, _blocker("block1", 1, pause, timeout, checks).build()),
        TaskSpec("block2", 1, _blocker("block2", 2, pause, timeout, checks).build()),
    ]
    return System(NAME, config, tasks,
                  locks=[LockSpec("sem1", 1, 1), LockSpec("sem2", 1, 1)],
                  variables={"shared1": 0, "shared2": 0},
                  checks=checks, properties=PROPERTIES)
