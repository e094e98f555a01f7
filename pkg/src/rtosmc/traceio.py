"""Counterexample traces on disk (JSON lines) and structural trace queries.

File layout: a header object on the first line, then one object per step::

    {"type": "header", "app": ..., "policy": ..., "config_hash": ..., "loop_start": ...}
    {"type": "step", "i": 0, "unit": 4, "label": "SysTick.trigger", "digest": "..."}
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .explorer import Step, Trace, Verdict
from .model import Config, System

FORMAT_VERSION = 1

_SET_TOP = re.compile(r"^PendSV\.set_top\((?P<task>[^)]+)\)$")


def config_hash(config: Config) -> str:
    blob = json.dumps(config.as_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def header_for(sys: System, verdict: Verdict) -> dict:
    return {
        "type": "header",
        "format": FORMAT_VERSION,
        "app": sys.name,
        "policy": sys.config.policy.kind.value,
        "config": sys.config.as_dict(),
        "config_hash": config_hash(sys.config),
        "verdict": verdict.kind,
        "violation": verdict.violation,
        "starving": verdict.starving,
        "loop_start": verdict.trace.loop_start if verdict.trace else None,
        "units": list(sys.unit_names),
    }


def write_trace(path: str | Path, sys: System, verdict: Verdict) -> Path:
    if verdict.trace is None:
        raise ValueError(f"verdict {verdict.kind} carries no trace")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(json.dumps(header_for(sys, verdict)) + "\n")
        for step in verdict.trace.steps:
            fh.write(json.dumps({"type": "step", **step.to_json()}) + "\n")
    return path


def read_trace(path: str | Path) -> tuple[dict, Trace]:
    header: Optional[dict] = None
    steps: list[Step] = []
    with Path(path).open() as fh:
        for n, line in enumerate(fh):
            if not line.strip():
                continue
            obj = json.loads(line)
            if n == 0:
                if obj.get("type") != "header":
                    raise ValueError(f"{path}: first line is not a trace header")
                header = obj
                continue
            steps.append(Step(obj["i"], obj["unit"], obj["label"], obj["digest"],
                              obj.get("violation")))
    if header is None:
        raise ValueError(f"{path}: empty trace file")
    return header, Trace(steps, header.get("loop_start"))


@dataclass(frozen=True)
class VictimEvent:
    """A task elected by PendSV that lost the processor before running."""

    elected_at: int      # index of the set_top step
    task: str
    chain_at: int        # index of the PendSV -> SysTick tail chain
    reelected_at: int    # index of the set_top that picked someone else
    replacement: str


def victim_events(trace: Trace) -> list[VictimEvent]:
    """Find every set_top(T) -> tailchain(SysTick) -> set_top(X != T) with T idle in between."""
    labels = trace.labels()
    out = []
    for i, lab in enumerate(labels):
        m = _SET_TOP.match(lab)
        if not m:
            continue
        task = m.group("task")
        chain = None
        for j in range(i + 1, len(labels)):
            lj = labels[j]
            if lj.startswith(task + "."):
                break
            if chain is None:
                if lj == "PendSV.tailchain(SysTick)":
                    chain = j
                elif lj.startswith("PendSV.return("):
                    break
                continue
            m2 = _SET_TOP.match(lj)
            if m2:
                if m2.group("task") != task:
                    out.append(VictimEvent(i, task, chain, j, m2.group("task")))
                break
    return out
