"""Countsem: two tasks each draining a counting semaphore and filling it back up.

Both tasks run at the idle priority.  A round takes the semaphore down to
zero with take(0), gives it back up to its maximum, then confirms that one
more give is refused.  The tasks yield after a round only under cooperative
scheduling; with ``fix_delays`` they delay for a few ticks instead, in every policy.

Checks:
  S2  every take(0) while the count is positive succeeds.
  S5  exactly as many gives succeed as takes did, so the extra give is refused.
"""
from ..model import EXPIRED, LockSpec, System, TaskSpec
from .dsl import TaskBuilder, check, coop_yield, delay, give, goto, ok, take

NAME = "Countsem"
PROPERTIES = frozenset({"S2", "S5"})
STARRED = True


def _worker(name: str, sem: str, count: str, top: int, fix: bool, pause: int, checks) -> TaskBuilder:
    b = TaskBuilder(name, checks)
    s2 = b.prop("S2", "take", ok, "take(0) failed while the count was positive")
    s5 = b.prop("S5", "give", ok, "give refused before the count reached its maximum")
    s5_over = b.prop("S5", "over", lambda st, t: st.outcome(t) == EXPIRED,
                     "give accepted beyond the number of takes")

    def step(var_delta, done_at, then, again):
        def run(st, t):
            n = st.var(count) + var_delta
            st.set_var(count, n)
            return then if n == done_at else again
        return run

    b.cmd("take", take(sem, 0), check(s2), step(1, top, "give", "take"))
    b.cmd("give", give(sem), check(s5), step(-1, 0, "over", "give"))
    b.cmd("over", give(sem), check(s5_over))
    b.cmd("rest", delay(pause) if fix else coop_yield, goto("take"), progress=True)
    return b


def build(config) -> System:
    top = config.override("countsem.max", 2)
    fix = config.fix_delays
    pause = config.override("countsem.fix_delay", 3)
    checks = []
    tasks = [TaskSpec(f"counter{i}", 0,
                      _worker(f"counter{i}", f"sem{i}", f"taken{i}", top, fix, pause, checks).build())
             for i in (1, 2)]
    return System(NAME, config, tasks,
                  locks=[LockSpec(f"sem{i}", top, top) for i in (1, 2)],
                  variables={"taken1": 0, "taken2": 0},
                  checks=checks, properties=PROPERTIES)
