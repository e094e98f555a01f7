"""End-to-end acceptance checks; each prints one PASS/FAIL line.

Tolerances: verdicts, violated properties and starving tasks must match
exactly; the oracle comparison requires identical reachable state sets and
finishes within ten seconds.
"""
import time
from importlib import resources

import pytest

from conftest import record
from rtosmc import explorer, invariants, traceio
from rtosmc._kernels import scc_find_cycle
from rtosmc.apps import build_app
from rtosmc.matrix import CellSpec, diff_grid, load_expected, run_cell
from rtosmc.model import make_config
from rtosmc.oracle import TOYS, brute_force_oracle

pytestmark = pytest.mark.slow

MIN_TOYS = 5
ORACLE_SECONDS = 10.0


def expected_grid() -> dict:
    path = resources.files("rtosmc") / "data" / "expected_matrix.json"
    with resources.as_file(path) as p:
        return load_expected(p)


def test_1_verdict_matrix(matrix_report):
    drift = diff_grid(matrix_report.grid(), expected_grid())
    cells = sum(len(c) for p in matrix_report.cells.values() for c in p.values())
    record("1 verdict matrix matches expected table", not drift,
           f"{cells} cells, {len(drift)} mismatches")
    assert not drift, drift


def test_2_victim_pattern_in_blockq_trace(matrix_report):
    cell = matrix_report.get("BlockQ", "timeslice", "safety")
    assert cell["verdict"] == "SafetyFail" and cell["violation"] == "S1"
    _, trace = traceio.read_trace(cell["trace"])
    explorer.replay(trace, build_app("BlockQ", make_config("timeslice")))
    events = traceio.victim_events(trace)
    record("2 BlockQ/timeslice S1 trace shows a preempted election", bool(events),
           f"{len(events)} victim events, trace length {len(trace)}")
    assert events


def test_3_semtest_coop_lasso(matrix_report):
    cell = matrix_report.get("Semtest", "cooperative", "liveness")
    assert cell["verdict"] == "LivenessFail"
    _, trace = traceio.read_trace(cell["trace"])
    explorer.replay(trace, build_app("Semtest", make_config("cooperative")))
    loop = trace.labels()[trace.loop_start:]
    pair = ("poll1.", "poll2.")
    pair_steps = [lab for lab in loop if lab.startswith(pair)]
    ticks = loop.count("SysTick.trigger")
    ok = cell["starving"] in ("poll1", "poll2") and not pair_steps and ticks >= 1
    record("3 Semtest/cooperative lasso: starving pair never yields, ticks continue", ok,
           f"starving {cell['starving']}, loop {len(loop)} steps, {ticks} ticks")
    assert ok


def _cell(app, policy, check, **cfg):
    return run_cell(CellSpec(app, policy, check, make_config(policy, **cfg)))


def test_4_dynamic_check_task():
    base = _cell("Dynamic", "preemptive", "liveness")
    fixed = _cell("Dynamic", "preemptive", "liveness", with_check_task=True)
    safety = _cell("Dynamic", "preemptive", "safety", with_check_task=True)
    ok = (base["verdict"] == "LivenessFail" and fixed["verdict"] == "LivenessPass"
          and safety["verdict"] == "SafetyPass")
    record("4 Dynamic/preemptive with check task: liveness fail -> pass", ok,
           f"{base['verdict']} -> {fixed['verdict']}, {fixed['stats']['states']} states")
    assert ok


def test_5_countsem_fixed_delays():
    base = _cell("Countsem", "timeslice", "liveness")
    fixed = _cell("Countsem", "timeslice", "liveness", idle_yields=False, fix_delays=True)
    safety = _cell("Countsem", "timeslice", "safety", idle_yields=False, fix_delays=True)
    ok = (base["verdict"] == "LivenessFail" and fixed["verdict"] == "LivenessPass"
          and safety["verdict"] == "SafetyPass")
    record("5 Countsem/timeslice idle_yields=false + delays: liveness passes", ok,
           f"{base['verdict']} -> {fixed['verdict']}")
    assert ok


def engine_summary(toy) -> dict:
    sys = toy.to_system()
    g = explorer.build_graph(sys, on_state=invariants.check_state)
    starving = []
    for t in range(1, sys.ntasks):
        _, edge = scc_find_cycle(g.n, g.offsets, g.dst, g.tag, t, explorer.TAG_TICK)
        if edge != -1:
            starving.append(sys.unit_names[t])
    return {"states": set(g.keys), "deadlock": bool(g.deadlocks), "starving": sorted(starving)}


def test_6_oracle_agreement():
    t0 = time.perf_counter()
    agree = []
    for toy in TOYS:
        ref = brute_force_oracle(toy)
        got = engine_summary(toy)
        assert not ref["truncated"]
        if all(ref[k] == got[k] for k in ("states", "deadlock", "starving")):
            agree.append(toy.name)
    seconds = time.perf_counter() - t0
    ok = len(agree) >= MIN_TOYS and len(agree) == len(TOYS) and seconds < ORACLE_SECONDS
    record(f"6 brute-force oracle agrees with engine on >= {MIN_TOYS} toys", ok,
           f"{len(agree)}/{len(TOYS)} agree in {seconds:.2f}s, limit {ORACLE_SECONDS}s")
    assert ok


def test_7_invariants_over_matrix(matrix_report):
    # the fixture runs with check_invariants=True, which raises on the first broken state
    states = sum(r["stats"]["states"] for p in matrix_report.cells.values()
                 for c in p.values() for r in c.values())
    ok = not matrix_report.inconclusive()
    record("7 structural invariants hold on every explored state", ok,
           f"{states} states checked")
    assert ok


def test_8_determinism(matrix_report, reverse_report):
    drift = diff_grid(reverse_report.grid(), matrix_report.grid())
    for app, pols in matrix_report.cells.items():
        for pol, checks in pols.items():
            for chk, r in checks.items():
                other = reverse_report.get(app, pol, chk)
                # a failing safety search stops early, so only full explorations compare sizes
                full = r["verdict"] != "SafetyFail"
                if full and other["stats"]["states"] != r["stats"]["states"]:
                    drift.append(f"{app}/{pol}/{chk}: state count differs")
                if other.get("starving") != r.get("starving"):
                    drift.append(f"{app}/{pol}/{chk}: starving task differs")
    record("8 verdicts identical for 1 vs N workers and reversed successor order", not drift,
           f"{len(drift)} differences")
    assert not drift, drift
