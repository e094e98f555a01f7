"""Dynamic: tasks suspended and resumed by a controller around a shared counter.

``continuous`` bumps the counter forever and never yields outside cooperative
scheduling.  ``limited`` takes one message from a queue, bumps the counter up
to a limit and suspends itself.  ``control`` suspends ``continuous``, checks
that the counter stays put, resets it, posts a message, resumes ``limited``
and delays; when it wakes the limited run must be complete.

``with_check_task`` adds a high-priority task that wakes periodically, which
perturbs scheduling enough to let ``control`` back in under preemption.

Checks:
  S0  after its delay the controller sees the limited run finished.
  S2  the controller's send(0) and the limited task's receive(0) succeed.
  S3  the limited task receives sequence numbers in order.
  S4  the counter does not move while ``continuous`` is suspended.
"""
from ..model import QueueSpec, System, TaskSpec
from .dsl import (TaskBuilder, check, coop_yield, delay, got, goto, incr, ok, receive, resume,
                  send, set_var, suspend, suspend_other, var)

NAME = "Dynamic"
PROPERTIES = frozenset({"S0", "S2", "S3", "S4"})
STARRED = True
MOD = 8
SEQ = 4


def build(config) -> System:
    limit = config.override("dynamic.limit", 2)
    pause = config.override("dynamic.delay", 4)
    checks = []

    cont = TaskBuilder("continuous", checks)
    cont.cmd("inc", incr("count", MOD), coop_yield, progress=True)

    lim = TaskBuilder("limited", checks)
    s2r = lim.prop("S2", "recv", ok, "receive(0) found the queue empty")
    s3 = lim.prop("S3", "recv", lambda st, t: got(st, t) == st.var("expect"),
                  "message out of order")
    lim.cmd("recv", receive("Q", 0), check(s2r), check(s3), incr("expect", SEQ))

    def bump(st, t):
        incr("count", MOD)(st, t)
        return "stop" if st.var("count") == limit else "inc"

    lim.cmd("inc", bump)
    lim.cmd("stop", suspend, goto("recv"), progress=True)

    ctl = TaskBuilder("control", checks)
    s4 = ctl.prop("S4", "verify", lambda st, t: st.var("count") == st.var("snapshot"),
                  "counter moved while its task was suspended")
    s2s = ctl.prop("S2", "reset", ok, "send(0) found the queue full")
    s0 = ctl.prop("S0", "expect", lambda st, t: st.var("count") == limit,
                  "limited run unfinished when the delay expired")
    ctl.cmd("hold", suspend_other("continuous"))
    ctl.cmd("read", set_var("snapshot", var("count")), coop_yield)
    ctl.cmd("verify", check(s4))
    ctl.cmd("reset", set_var("count", lambda st, t: 0), send("Q", var("seq"), 0), check(s2s),
            incr("seq", SEQ))
    ctl.cmd("run", resume("limited"))
    ctl.cmd("wait", delay(pause))
    ctl.cmd("expect", check(s0))
    ctl.cmd("release", resume("continuous"), coop_yield, goto("hold"), progress=True)

    tasks = [TaskSpec("continuous", 0, cont.build()),
             TaskSpec("limited", 0, lim.build(), start_suspended=True),
             TaskSpec("control", 0, ctl.build())]
    if config.with_check_task:
        chk = TaskBuilder("checker", checks)
        chk.cmd("check", delay(config.override("dynamic.check_period", 20), clamp=False),
                progress=True)
        tasks.append(TaskSpec("checker", 3, chk.build()))
    return System(NAME, config, tasks, queues=[QueueSpec("Q", 1)],
                  variables={"count": 0, "snapshot": 0, "seq": 0, "expect": 0},
                  checks=checks, properties=PROPERTIES)

