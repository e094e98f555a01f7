"""Small hand-built systems for unit tests."""
from rtosmc.model import LockSpec, Program, QueueSpec, System, TaskSpec, make_config


def idle_program(name: str) -> Program:
    return Program(name).add("spin", lambda st, t: None, progress=True).seal()


def tiny(policy="preemptive", prios=(1, 1), queues=(), locks=(), **cfg) -> System:
    tasks = [TaskSpec(f"t{i + 1}", p, idle_program(f"t{i + 1}")) for i, p in enumerate(prios)]
    return System("tiny", make_config(policy, **cfg), tasks,
                  queues=[QueueSpec(*q) for q in queues],
                  locks=[LockSpec(*lk) for lk in locks])


def with_queue(capacity=2, prios=(1, 2, 3), **cfg) -> System:
    return tiny(prios=prios, queues=[("Q", capacity)], **cfg)


def with_mutex(prios=(1, 2, 3), **cfg) -> System:
    return tiny(prios=prios, locks=[("M", 1, 1, True)], **cfg)


def with_semaphore(max_count=2, initial=1, prios=(1, 2), **cfg) -> System:
    return tiny(prios=prios, locks=[("S", max_count, initial, False)], **cfg)
