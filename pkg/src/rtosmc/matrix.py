"""Running single cells and the full app x policy verdict matrix."""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from . import explorer, invariants, traceio
from .apps import APP_NAMES, build_app, lookup
from .model import Config, Policy, SchedKind

FORMAT_VERSION = 1
POLICIES: tuple[str, ...] = tuple(k.value for k in SchedKind)
CHECKS = ("safety", "liveness")


@dataclass(frozen=True)
class CellSpec:
    app: str
    policy: str
    check: str                  # safety | liveness | deadlock
    config: Config
    limits: explorer.Limits = explorer.Limits()
    reverse: bool = False
    check_invariants: bool = True
    trace_dir: Optional[str] = None


def config_for(base: Config, policy: str) -> Config:
    return replace(base, policy=Policy(SchedKind(policy), base.policy.idle_yields))


def run_cell(spec: CellSpec) -> dict:
    """Run one check and return its JSON-ready result."""
    app = lookup(spec.app).NAME
    sys = build_app(app, config_for(spec.config, spec.policy))
    hook = invariants.check_state if spec.check_invariants else None
    if spec.check == "safety":
        v = explorer.check_safety(sys, spec.limits, reverse=spec.reverse, on_state=hook)
    elif spec.check == "liveness":
        v = explorer.check_liveness(sys, spec.limits, reverse=spec.reverse, on_state=hook)
    elif spec.check == "deadlock":
        v = explorer.check_deadlock(sys, spec.limits, reverse=spec.reverse, on_state=hook)
    else:
        raise ValueError(f"unknown check {spec.check!r}")
    out = {"verdict": v.kind, "stats": v.stats.as_dict()}
    if v.violation:
        out["violation"] = v.violation
    if v.starving:
        out["starving"] = v.starving
    if v.detail:
        out["detail"] = v.detail
    if v.trace is not None:
        out["trace_length"] = len(v.trace)
        out["loop_start"] = v.trace.loop_start
        if spec.trace_dir:
            name = f"{app}-{spec.policy}-{spec.check}.jsonl"
            out["trace"] = str(traceio.write_trace(Path(spec.trace_dir) / name, sys, v))
    return out


@dataclass
class MatrixReport:
    cells: dict = field(default_factory=dict)      # app -> policy -> check -> result
    config: dict = field(default_factory=dict)
    seconds: float = 0.0
    format: int = FORMAT_VERSION

    def get(self, app: str, policy: str, check: str) -> Optional[dict]:
        return self.cells.get(app, {}).get(policy, {}).get(check)

    def verdict(self, app: str, policy: str, check: str) -> Optional[str]:
        cell = self.get(app, policy, check)
        return cell["verdict"] if cell else None

    def grid(self) -> dict:
        """Verdicts only (plus the violated property for safety failures)."""
        out: dict = {}
        for app, pols in self.cells.items():
            for pol, checks in pols.items():
                for chk, res in checks.items():
                    entry = {"verdict": res["verdict"]}
                    if res.get("violation"):
                        entry["violation"] = res["violation"]
                    out.setdefault(app, {}).setdefault(pol, {})[chk] = entry
        return out

    def to_json(self) -> dict:
        return {"format": self.format, "seconds": round(self.seconds, 3), "config": self.config,
                "cells": self.cells}

    @classmethod
    def from_json(cls, d: dict) -> "MatrixReport":
        if d.get("format") != FORMAT_VERSION:
            raise ValueError(f"unsupported report format {d.get('format')!r}")
        return cls(cells=d["cells"], config=d.get("config", {}), seconds=d.get("seconds", 0.0))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "MatrixReport":
        return cls.from_json(json.loads(text))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps() + "\n")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "MatrixReport":
        return cls.loads(Path(path).read_text())

    def inconclusive(self) -> list[tuple[str, str, str]]:
        return [(a, p, c) for a, pols in self.cells.items() for p, checks in pols.items()
                for c, r in checks.items() if r["verdict"] == "LimitExceeded"]


def diff_grid(actual: dict, expected: dict) -> list[str]:
    """Human-readable differences for every cell present in ``actual``.

    Only cells that were run are compared, so a filtered run is checked
    against the matching slice of the expectation.
    """
    out = []
    for app, pols in actual.items():
        for pol, checks in pols.items():
            for chk, got in checks.items():
                want = expected.get(app, {}).get(pol, {}).get(chk)
                if want is None:
                    out.append(f"{app}/{pol}/{chk}: no expectation")
                    continue
                for key in ("verdict", "violation"):
                    if want.get(key) != got.get(key):
                        out.append(f"{app}/{pol}/{chk}: {key} {got.get(key)!r}, "
                                   f"expected {want.get(key)!r}")
    return out


def load_expected(path: str | Path) -> dict:
    d = json.loads(Path(path).read_text())
    return d.get("cells", d)


def run_matrix(config: Config, *, apps: Iterable[str] = APP_NAMES,
               policies: Iterable[str] = POLICIES, checks: Iterable[str] = CHECKS,
               limits: explorer.Limits = explorer.Limits(), workers: int = 1,
               reverse: bool = False, check_invariants: bool = True,
               trace_dir: Optional[str] = None) -> MatrixReport:
    t0 = time.perf_counter()
    specs = [CellSpec(lookup(a).NAME, p, c, config, limits, reverse, check_invariants, trace_dir)
             for a in apps for p in policies for c in checks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, specs))
    else:
        results = [run_cell(s) for s in specs]
    report = MatrixReport(config=config.as_dict())
    for spec, res in zip(specs, results):
        report.cells.setdefault(spec.app, {}).setdefault(spec.policy, {})[spec.check] = res
    report.seconds = time.perf_counter() - t0
    return report
