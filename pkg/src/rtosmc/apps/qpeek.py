"""QPeek: one queue read at three priority levels.

``low`` posts sequence numbers with send(0).  ``high`` blocks peeking at the
queue, checks the value it saw and suspends.  ``medium`` blocks receiving,
which consumes the message, then resumes ``high`` for the next round.  A
single post therefore wakes the peeker with a copy and the receiver with the
message itself.

Checks:
  S1  a blocking peek or receive ends with data available.
  S2  the low task's send(0) finds room in the queue.
  S3  both readers see the sequence numbers in order.
"""
from ..model import QueueSpec, System, TaskSpec
from .dsl import (FOREVER, TaskBuilder, check, coop_yield, goto, got, incr, ok, peek, receive,
                  resume, send, suspend, var)

NAME = "QPeek"
PROPERTIES = frozenset({"S1", "S2", "S3"})
STARRED = True
SEQ = 4


def _in_order(counter: str):
    return lambda st, t: got(st, t) == st.var(counter)


def build(config) -> System:
    checks = []

    high = TaskBuilder("high", checks)
    s1h = high.prop("S1", "seen", ok, "peek woke without data")
    s3h = high.prop("S3", "seen", _in_order("high_next"), "peeked message out of order")
    high.cmd("peek", peek("Q", FOREVER))
    high.cmd("seen", check(s1h), check(s3h), incr("high_next", SEQ))
    high.cmd("sleep", suspend, goto("peek"), progress=True)

    med = TaskBuilder("medium", checks)
    s1m = med.prop("S1", "got", ok, "receive woke without data")
    s3m = med.prop("S3", "got", _in_order("medium_next"), "received message out of order")
    med.cmd("receive", receive("Q", FOREVER))
    med.cmd("got", check(s1m), check(s3m), incr("medium_next", SEQ))
    med.cmd("wake_high", resume("high"), goto("receive"), progress=True)

    low = TaskBuilder("low", checks)
    s2 = low.prop("S2", "send", ok, "send(0) found the queue full")
    low.cmd("send", send("Q", var("seq"), 0), check(s2), incr("seq", SEQ))
    low.cmd("rest", coop_yield, goto("send"), progress=True)

    tasks = [TaskSpec("high", 2, high.build()), TaskSpec("medium", 1, med.build()),
             TaskSpec("low", 0, low.build())]
    return System(NAME, config, tasks, queues=[QueueSpec("Q", 1)],
                  variables={"seq": 0, "high_next": 0, "medium_next": 0},
                  checks=checks, properties=PROPERTIES)
