"""The eight example applications and lookup by name."""
from __future__ import annotations

from types import ModuleType
from typing import Iterable, Optional

from ..model import Config, GlobalState, PropertyCheck, System, UnknownApp, Violation
from . import blockq, countsem, dynamic, genqtest, pollq, qpeek, recmutex, semtest

_MODULES: tuple[ModuleType, ...] = (pollq, semtest, blockq, qpeek, dynamic, countsem, recmutex,
                                    genqtest)
APPS: dict[str, ModuleType] = {m.NAME: m for m in _MODULES}
APP_NAMES: tuple[str, ...] = tuple(APPS)


def lookup(name: str) -> ModuleType:
    """Resolve an app by name, case-insensitively."""
    for key, mod in APPS.items():
        if key.lower() == name.strip().lower():
            return mod
    raise UnknownApp(f"unknown app {name!r}; choose from {', '.join(APP_NAMES)}")


def build_app(name: str, config: Config) -> System:
    return lookup(name).build(config)


def properties(name: str) -> frozenset:
    return lookup(name).PROPERTIES


def starred(name: str) -> bool:
    return lookup(name).STARRED


def evaluate_checks(state: GlobalState, checks: Iterable[PropertyCheck],
                    task: Optional[int] = None) -> Optional[Violation]:
    """First failing check as a Violation, or None.

    Each predicate is evaluated for the task that owns it, or for ``task``
    when given.
    """
    for pc in checks:
        t = state.sys.task_id(pc.unit) if task is None else task
        if not pc.predicate(state, t):
            return Violation(pc.kind, f"{pc.unit}:{pc.label} {pc.description}".strip())
    return None


__all__ = ["APPS", "APP_NAMES", "build_app", "evaluate_checks", "lookup", "properties",
           "starred"]
