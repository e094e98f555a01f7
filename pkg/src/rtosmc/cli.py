"""Command-line front end.

Exit status: 0 every requested check passed (or, with ``--expect``, the
verdicts match the expectation), 1 a verified failure or verdict drift,
2 inconclusive because a search limit was hit, 3 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import BACKEND, __version__
from .apps import APP_NAMES, lookup
from .explorer import DEFAULT_MAX_DEPTH, DEFAULT_MAX_STATES, Limits
from .matrix import CHECKS, POLICIES, diff_grid, load_expected, run_matrix
from .model import Config, ModelError, Policy, make_config, parse_policy

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3

log = logging.getLogger("rtosmc")

_CONFIG_KEYS = {"policy", "idle_yields", "waiter_order", "stack_capacity", "delay_max",
                "tick_gap", "with_check_task", "fix_delays", "apps"}


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rtosmc",
        description="Model-check FreeRTOS-style example apps on a Cortex-M interrupt model.")
    p.add_argument("--app", default="all",
                   help=f"app name or 'all' ({', '.join(APP_NAMES)})")
    p.add_argument("--policy", default="all",
                   help="cooperative | preemptive | timeslice | all")
    p.add_argument("--check", default="all", choices=["safety", "liveness", "deadlock", "all"])
    p.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES)
    p.add_argument("--max-depth", type=_positive, default=DEFAULT_MAX_DEPTH)
    p.add_argument("--trace-out", metavar="DIR", help="write failing traces here (JSON lines)")
    p.add_argument("--report-out", metavar="FILE", help="write the JSON report here")
    p.add_argument("--expect", metavar="FILE",
                   help="expected verdicts; exit 1 on any drift instead of on failures")
    p.add_argument("--workers", type=_positive, default=1, help="parallel cells")
    p.add_argument("--with-check-task", action="store_true", default=None,
                   help="add a high-priority periodic check task (Dynamic)")
    p.add_argument("--fix-delays", action="store_true", default=None,
                   help="replace never-yielding loop tails with delays (Countsem)")
    p.add_argument("--waiter-order", choices=["priority", "fifo"], default=None)
    p.add_argument("--idle-yields", type=_bool, default=None, metavar="BOOL")
    p.add_argument("--config", metavar="FILE", help="JSON config file; flags override it")
    p.add_argument("--reverse", action="store_true", help="explore successors in reverse order")
    p.add_argument("--no-invariants", action="store_true",
                   help="skip structural invariant checks on every state")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    return p


def load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def effective_config(args: argparse.Namespace) -> Config:
    """Config file values, then command-line flags on top."""
    data = load_config_file(args.config) if args.config else {}
    overrides = []
    for app, consts in (data.get("apps") or {}).items():
        prefix = lookup(app).NAME.lower()
        for k, v in consts.items():
            overrides.append((f"{prefix}.{k}", v))
    try:
        cfg = make_config(
            data.get("policy", "cooperative"),
            idle_yields=bool(data.get("idle_yields", True)),
            waiter_order=data.get("waiter_order", "priority"),
            stack_capacity=int(data.get("stack_capacity", 4)),
            delay_max=int(data.get("delay_max", 7)),
            tick_gap=bool(data.get("tick_gap", True)),
            with_check_task=bool(data.get("with_check_task", False)),
            fix_delays=bool(data.get("fix_delays", False)),
            overrides=tuple(sorted(overrides)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.idle_yields is not None:
        cfg = replace(cfg, policy=Policy(cfg.policy.kind, args.idle_yields))
    if args.waiter_order is not None:
        cfg = replace(cfg, waiter_order=args.waiter_order)
    if args.with_check_task:
        cfg = replace(cfg, with_check_task=True)
    if args.fix_delays:
        cfg = replace(cfg, fix_delays=True)
    if cfg.waiter_order not in ("priority", "fifo"):
        raise UsageError(f"waiter_order must be priority or fifo, not {cfg.waiter_order!r}")
    if not 1 <= cfg.stack_capacity <= 8:
        raise UsageError("stack_capacity must be between 1 and 8")
    if not 1 <= cfg.delay_max < 255:
        raise UsageError("delay_max must be between 1 and 254")
    return cfg


def _selection(args) -> tuple[list[str], list[str], list[str]]:
    apps = list(APP_NAMES) if args.app.lower() == "all" else [lookup(args.app).NAME]
    if args.policy.lower() == "all":
        policies = list(POLICIES)
    else:
        try:
            policies = [parse_policy(args.policy).value]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    checks = list(CHECKS) if args.check == "all" else [args.check]
    return apps, policies, checks


def _print_report(report, apps, policies, checks, out=None) -> None:
    out = out or sys.stdout
    width = max(len(a) for a in apps) + 2
    header = "".join(f"{p[:11]:>26}" for p in policies)
    print(f"{'':{width}}{header}", file=out)
    for app in apps:
        cells = []
        for pol in policies:
            parts = []
            for chk in checks:
                r = report.get(app, pol, chk)
                tag = {"SafetyPass": "ok", "LivenessPass": "ok", "LimitExceeded": "??"}.get(
                    r["verdict"], "FAIL")
                extra = r.get("violation") or ""
                parts.append(f"{chk[0]}:{tag}{'(' + extra + ')' if extra else ''}")
            cells.append(f"{' '.join(parts):>26}")
        print(f"{app:{width}}{''.join(cells)}", file=out)
    print(f"total {report.seconds:.1f}s", file=out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = effective_config(args)
        apps, policies, checks = _selection(args)
        limits = Limits(args.max_states, args.max_depth)
        expected = load_expected(args.expect) if args.expect else None
    except (UsageError, ModelError, ValueError, OSError) as exc:
        print(f"rtosmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = run_matrix(cfg, apps=apps, policies=policies, checks=checks, limits=limits,
                        workers=args.workers, reverse=args.reverse,
                        check_invariants=not args.no_invariants, trace_dir=args.trace_out)
    if args.report_out:
        report.save(args.report_out)
    _print_report(report, apps, policies, checks)

    if report.inconclusive():
        return EXIT_INCONCLUSIVE
    if expected is not None:
        drift = diff_grid(report.grid(), expected)
        for line in drift:
            print(f"drift: {line}", file=sys.stderr)
        return EXIT_FAIL if drift else EXIT_PASS
    failed = any(r["verdict"] not in ("SafetyPass", "LivenessPass")
                 for pols in report.cells.values() for chks in pols.values()
                 for r in chks.values())
    return EXIT_FAIL if failed else EXIT_PASS


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
