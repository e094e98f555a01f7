"""Compare the compiled and pure-Python kernels on a real state graph.

    python benchmarks/bench_kernels.py [--app Semtest --policy timeslice] [--repeat 3]
"""
import argparse
import os
import subprocess
import sys
import timeit

from rtosmc import _fallback, explorer
from rtosmc.apps import build_app
from rtosmc.model import make_config

try:
    from rtosmc import _speedups
except ImportError:  # pragma: no cover
    _speedups = None


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def end_to_end(app, policy, pure):
    code = (
        "import time; from rtosmc import explorer; from rtosmc.apps import build_app;"
        "from rtosmc.model import make_config;"
        f"s=build_app({app!r}, make_config({policy!r})); t=time.perf_counter();"
        "v=explorer.check_liveness(s); print(time.perf_counter()-t, v.kind)"
    )
    env = dict(os.environ)
    env.pop("RTOSMC_PURE", None)
    if pure:
        env["RTOSMC_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    return float(out[0]), out[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--app", default="BlockQ")
    ap.add_argument("--policy", default="timeslice")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _speedups is None:
        sys.exit("compiled kernels are not built; run pip install -e . first")

    g = explorer.build_graph(build_app(args.app, make_config(args.policy)))
    print(f"{args.app}/{args.policy}: {g.n} states, {len(g.dst)} transitions")
    keys = g.keys
    rows = []
    for name, impl in (("python", _fallback), ("cython", _speedups)):
        d = best(lambda: [impl.digest64(k) for k in keys], args.repeat)
        s = best(lambda: [impl.scc_find_cycle(g.n, g.offsets, g.dst, g.tag, t, explorer.TAG_TICK)
                          for t in range(1, g.sys.ntasks)], args.repeat)
        rows.append((name, d, s))
    print(f"{'backend':8} {'digest64 (s)':>14} {'scc, all tasks (s)':>20}")
    for name, d, s in rows:
        print(f"{name:8} {d:14.4f} {s:20.4f}")
    (_, pd, ps), (_, cd, cs) = rows
    print(f"speedup  {pd / cd:13.1f}x {ps / cs:19.1f}x")

    for pure in (True, False):
        secs, verdict = end_to_end(args.app, args.policy, pure)
        print(f"end-to-end liveness, {'python' if pure else 'cython'}: {secs:.2f}s ({verdict})")


if __name__ == "__main__":
    main()
