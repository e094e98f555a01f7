"""Recmutex: three tasks at high, medium and low priority sharing one mutex.

The high and medium tasks block on the mutex with a timeout, hold it briefly,
release it and suspend themselves.  The low task polls with take(0); once it
holds the mutex it resumes both others, which then wait on it, and checks
that it inherited the high priority before releasing.

Checks:
  S1  a blocking take succeeds before its timeout.
  S4  the mutex owner mark is intact inside each critical section.
  S5  every release by the owner is accepted.
  S6  while others wait, the holder runs at least at the top waiter's priority.
"""
from ..model import OK, LockSpec, System, TaskSpec
from .dsl import (TaskBuilder, check, coop_yield, failed, give, goto, ok, resume, seq, set_var,
                  suspend, take, when)

NAME = "Recmutex"
PROPERTIES = frozenset({"S1", "S4", "S5", "S6"})
STARRED = True


def _inherits(st, t) -> bool:
    waiting = [st.eff(w) for w in st.lock_waiters(0)]
    return not waiting or st.eff(t) >= max(waiting)


def _owner_section(b: TaskBuilder, mark: int, after: str):
    s4 = b.prop("S4", "hold", lambda st, t: st.var("owner") == mark,
                "mutex owner mark overwritten")
    s5 = b.prop("S5", "release", lambda st, t: st.outcome(t) == OK, "release refused")
    b.cmd("mark", set_var("owner", lambda st, t: mark))
    b.cmd("hold", check(s4))
    b.cmd("release", set_var("owner", lambda st, t: 0), give("M"), check(s5), goto(after))


def _blocking(name: str, mark: int, timeout: int, checks) -> TaskBuilder:
    b = TaskBuilder(name, checks)
    s1 = b.prop("S1", "got", ok, "mutex not available when the wait ended")
    b.cmd("take", take("M", timeout))
    b.cmd("got", check(s1))
    _owner_section(b, mark, "sleep")
    b.cmd("sleep", suspend, goto("take"), progress=True)
    return b


def _poller(checks) -> TaskBuilder:
    b = TaskBuilder("low", checks)
    s6 = b.prop("S6", "check", _inherits, "holder did not inherit the waiter's priority")
    b.cmd("poll", take("M", 0), when(failed, seq(coop_yield, goto("poll"))))
    b.cmd("mark", set_var("owner", lambda st, t: 3))
    b.cmd("wake_high", resume("high"))
    b.cmd("wake_medium", resume("medium"))
    b.cmd("check", check(s6), check(b.prop("S4", "check", lambda st, t: st.var("owner") == 3,
                                            "mutex owner mark overwritten")))
    s5 = b.prop("S5", "release", lambda st, t: st.outcome(t) == OK, "release refused")
    b.cmd("release", set_var("owner", lambda st, t: 0), give("M"), check(s5))
    b.cmd("rest", coop_yield, goto("poll"), progress=True)
    return b


def build(config) -> System:
    timeout = config.override("recmutex.timeout", 7)
    checks = []
    tasks = [
        TaskSpec("high", 2, _blocking("high", 1, timeout, checks).build()),
        TaskSpec("medium", 1, _blocking("medium", 2, timeout, checks).build()),
        TaskSpec("low", 0, _poller(checks).build()),
    ]
    return System(NAME, config, tasks, locks=[LockSpec("M", 1, 1, mutex=True)],
                  variables={"owner": 0}, checks=checks, properties=PROPERTIES)
