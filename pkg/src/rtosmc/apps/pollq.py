"""PollQ: a producer and a consumer polling one queue without blocking.

The consumer outranks the producer, and both delay themselves after every
round, so neither can keep the other off the processor.

Checks:
  S2  consumer: a queue that reports a waiting message must hand it over.
  S3  consumer: messages arrive in the order they were sent.
  S0  consumer: after its delay, the producer is never more than one queue
      ahead of it (messages in flight equal the queue fill level).
"""
from ..model import QueueSpec, System, TaskSpec
from .dsl import TaskBuilder, check, delay, got, incr, ok, receive, send, var, when

NAME = "PollQ"
PROPERTIES = frozenset({"S0", "S2", "S3"})
STARRED = False
MOD = 4


def build(config) -> System:
    cap = config.override("pollq.capacity", 2)
    pause = config.override("pollq.delay", 2)
    checks = []

    p = TaskBuilder("producer", checks)
    p.cmd("send", send("Q", var("sent"), 0),
          when(ok, incr("sent", MOD)), progress=True)
    p.cmd("pause", delay(pause))

    c = TaskBuilder("consumer", checks)
    s2 = c.prop("S2", "poll", ok, "receive(0) failed on a non-empty queue")
    s3 = c.prop("S3", "poll", lambda st, t: got(st, t) == st.var("expect"),
                "message out of order")
    s0 = c.prop("S0", "rest",
                lambda st, t: (st.var("sent") - st.var("expect")) % MOD
                == len(st.queue_buffer(0)),
                "producer ran ahead of the queue")

    def poll(st, t):
        if not st.queue_buffer(0):
            return "rest"
        receive("Q", 0)(st, t)
        check(s2)(st, t)
        check(s3)(st, t)
        incr("expect", MOD)(st, t)
        return "poll"

    c.cmd("poll", poll)
    c.cmd("rest", check(s0), delay(pause), progress=True)

    return System(NAME, config, [TaskSpec("producer", 1, p.build()),
                                 TaskSpec("consumer", 2, c.build())],
                  queues=[QueueSpec("Q", cap)], variables={"sent": 0, "expect": 0},
                  checks=checks, properties=PROPERTIES)
