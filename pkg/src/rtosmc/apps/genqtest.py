"""GenQTest: a queue round-trip task beside a priority-inheritance trio.

``fifo`` runs at the idle priority, pushing a sequence number into a queue
and reading it straight back; it yields only under cooperative scheduling.
``low`` grabs a mutex, resumes ``high`` (which blocks on the mutex and lends
``low`` its priority) and ``medium``, then releases.  ``medium`` only counts
rounds and must never run while ``low`` carries the borrowed priority.

Checks:
  S1  high's blocking take ends holding the mutex.
  S2  fifo's send(0)/receive(0) and low's take(0) succeed.
  S3  fifo reads back what it queued, in order.
  S4  the owner mark is intact while a task holds the mutex.
  S6  low runs at the priority of the highest task waiting on its mutex.
"""
from ..model import FOREVER, OK, LockSpec, QueueSpec, System, TaskSpec
from .dsl import (TaskBuilder, check, coop_yield, give, goto, got, incr, ok, receive, resume,
                  send, set_var, suspend, take, var)

NAME = "GenQTest"
PROPERTIES = frozenset({"S1", "S2", "S3", "S4", "S6"})
STARRED = True
SEQ = 4


def _inherits(st, t) -> bool:
    waiting = [st.eff(w) for w in st.lock_waiters(0)]
    return not waiting or st.eff(t) >= max(waiting)


def _mark_ok(mark: int):
    return lambda st, t: st.var("owner") == mark


def build(config) -> System:
    checks = []

    fifo = TaskBuilder("fifo", checks)
    s2s = fifo.prop("S2", "send", ok, "send(0) found the queue full")
    s2r = fifo.prop("S2", "recv", ok, "receive(0) found the queue empty")
    s3 = fifo.prop("S3", "recv", lambda st, t: got(st, t) == st.var("seq"),
                   "read back a different message")
    fifo.cmd("send", send("Q", var("seq"), 0), check(s2s))
    fifo.cmd("recv", receive("Q", 0), check(s2r), check(s3), incr("seq", SEQ))
    fifo.cmd("rest", coop_yield, goto("send"), progress=True)

    high = TaskBuilder("high", checks)
    s1 = high.prop("S1", "got", ok, "mutex not held when the wait ended")
    s4h = high.prop("S4", "release", _mark_ok(1), "owner mark overwritten")
    high.cmd("take", take("M", FOREVER))
    high.cmd("got", check(s1), set_var("owner", lambda st, t: 1))
    high.cmd("release", check(s4h), set_var("owner", lambda st, t: 0), give("M"))
    high.cmd("sleep", suspend, goto("take"), progress=True)

    med = TaskBuilder("medium", checks)
    med.cmd("count", incr("rounds", SEQ))
    med.cmd("sleep", suspend, goto("count"), progress=True)

    low = TaskBuilder("low", checks)
    s2l = low.prop("S2", "take", ok, "take(0) failed on a free mutex")
    s6 = low.prop("S6", "check", _inherits, "holder below the waiting task's priority")
    s4l = low.prop("S4", "release", _mark_ok(3), "owner mark overwritten")
    s2_give = low.prop("S2", "release", lambda st, t: st.outcome(t) == OK, "release refused")
    low.cmd("take", take("M", 0), check(s2l), set_var("owner", lambda st, t: 3))
    low.cmd("wake_high", resume("high"))
    low.cmd("wake_medium", resume("medium"))
    low.cmd("check", check(s6))
    low.cmd("release", check(s4l), set_var("owner", lambda st, t: 0), give("M"), check(s2_give))
    low.cmd("rest", coop_yield, goto("take"), progress=True)

    tasks = [TaskSpec("high", 2, high.build(), start_suspended=True),
             TaskSpec("medium", 1, med.build(), start_suspended=True),
             TaskSpec("low", 0, low.build()),
             TaskSpec("fifo", 0, fifo.build())]
    return System(NAME, config, tasks, queues=[QueueSpec("Q", 1)],
                  locks=[LockSpec("M", 1, 1, mutex=True)],
                  variables={"seq": 0, "owner": 0, "rounds": 0},
                  checks=checks, properties=PROPERTIES)
