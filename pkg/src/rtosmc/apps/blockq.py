"""BlockQ: three producer/consumer pairs, each on its own one-slot queue.

Pair 1: a high-priority producer blocks in send while a low-priority
consumer polls with receive(0).  Pair 2: a low-priority producer posts with
send(0) to a high-priority consumer blocked in receive.  Pair 3: both sides
are low priority and block with a timeout.  Low-priority tasks yield after
each round under cooperative scheduling.

A low-priority round is a single command that first checks the outcome of
the previous call, so a task that was woken (or timed out) is judged the
next time it actually runs.

Checks:
  S1  a blocking send or receive completes before its timeout.
  S2  the polling receive(0) and the posting send(0) never find the queue unready.
  S3  every consumer sees its producer's sequence numbers in order.
"""
from ..model import NO_OUTCOME, OK, QueueSpec, System, TaskSpec
from .dsl import (FOREVER, TaskBuilder, check, coop_yield, got, incr, ok, receive, send, var)

NAME = "BlockQ"
PROPERTIES = frozenset({"S1", "S2", "S3"})
STARRED = True
SEQ = 4


def _in_order(counter: str):
    return lambda st, t: got(st, t) == st.var(counter)


def _blocking_round(b: TaskBuilder, op, after_ok, label: str):
    """Judge the previous blocking call, then issue the next one, as one command."""
    s1 = b.prop("S1", label, lambda st, t: st.outcome(t) in (OK, NO_OUTCOME),
                "blocking call timed out")

    def run(st, t):
        check(s1)(st, t)
        if st.outcome(t) == OK:
            after_ok(st, t)
        op(st, t)
        coop_yield(st, t)
    b.cmd(label, run, progress=True)


def build(config) -> System:
    d_high = config.override("blockq.high_timeout", FOREVER)
    d_low = config.override("blockq.low_timeout", 3)
    checks = []

    p1 = TaskBuilder("producer1", checks)
    s1p1 = p1.prop("S1", "sent", ok, "send timed out")
    p1.cmd("send", send("Q1", var("seq1"), d_high))
    p1.cmd("sent", check(s1p1), incr("seq1", SEQ), progress=True)

    c1 = TaskBuilder("consumer1", checks)
    s2c1 = c1.prop("S2", "poll", ok, "receive(0) found the queue empty")
    s3c1 = c1.prop("S3", "poll", _in_order("next1"), "message out of order")
    c1.cmd("poll", receive("Q1", 0), check(s2c1), check(s3c1), incr("next1", SEQ), coop_yield,
           progress=True)

    p2 = TaskBuilder("producer2", checks)
    s2p2 = p2.prop("S2", "post", ok, "send(0) found the queue full")
    p2.cmd("post", send("Q2", var("seq2"), 0), check(s2p2), incr("seq2", SEQ), coop_yield,
           progress=True)

    c2 = TaskBuilder("consumer2", checks)
    s1c2 = c2.prop("S1", "got", ok, "receive timed out")
    s3c2 = c2.prop("S3", "got", _in_order("next2"), "message out of order")
    c2.cmd("receive", receive("Q2", d_high))
    c2.cmd("got", check(s1c2), check(s3c2), incr("next2", SEQ), progress=True)

    p3 = TaskBuilder("producer3", checks)
    _blocking_round(p3, send("Q3", var("seq3"), d_low), incr("seq3", SEQ), "send")

    c3 = TaskBuilder("consumer3", checks)
    s3c3 = c3.prop("S3", "receive", _in_order("next3"), "message out of order")

    def consumed(st, t):
        check(s3c3)(st, t)
        incr("next3", SEQ)(st, t)
    _blocking_round(c3, receive("Q3", d_low), consumed, "receive")

    tasks = [TaskSpec("producer1", 1, p1.build()), TaskSpec("consumer1", 0, c1.build()),
             TaskSpec("producer2", 0, p2.build()), TaskSpec("consumer2", 1, c2.build()),
             TaskSpec("producer3", 0, p3.build()), TaskSpec("consumer3", 0, c3.build())]
    return System(NAME, config, tasks,
                  queues=[QueueSpec("Q1", 1), QueueSpec("Q2", 1), QueueSpec("Q3", 1)],
                  variables={k: 0 for k in ("seq1", "next1", "seq2", "next2", "seq3", "next3")},
                  checks=checks, properties=PROPERTIES)
