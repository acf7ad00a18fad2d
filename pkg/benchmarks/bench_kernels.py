"""Compare the compiled and pure-Python probe loops on a few fixed workloads.

    python3 benchmarks/bench_kernels.py [--repeats 5] [--scale 1.0] [--json out.json]

Each case is run with both backends; counters must match exactly and the
table reports median wall time per backend and the speed-up.
"""
from __future__ import annotations

import argparse
import json
import statistics

from treetracker.convolution import parse_convolution, plan_from_rooted
from treetracker.engine import CountSink, kernels, run_plan
from treetracker.planner import compile_plan
from treetracker.workloads import gen_box, gen_example1, gen_star


def cases(scale: float):
    n = lambda base: max(2, int(base * scale))  # noqa: E731
    ex = gen_example1(n(100_000))
    yield "example1 ttj", "ttj", "", compile_plan(ex.query, ex.order), ex.db
    ex = gen_example1(n(64))
    yield "example1 hj", "hj", "", compile_plan(ex.query, ex.order), ex.db
    st = gen_star(n(50_000), seed=1, dangling_fraction=0.5)
    plan = compile_plan(st.query, st.order)
    yield "star ttj", "ttj", "", plan, st.db
    yield "star ttj+ng", "ttj", "ng", plan, st.db
    bx = gen_box(n(16), seed=1)
    yield "box ttj (rooted)", "ttj", "", plan_from_rooted(bx.query, parse_convolution(bx.conv)), bx.db


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args()
    backends = sorted(kernels.BACKENDS)
    if "cython" not in backends:
        print("compiled backend not built; only the Python loops are timed")
    prev = kernels.BACKEND
    rows = []
    for name, algo, opts, plan, db in cases(args.scale):
        row = {"case": name}
        counters = {}
        for b in backends:
            kernels.use_backend(b)
            times = []
            for _ in range(args.repeats):
                st = run_plan(algo, plan, db, CountSink(), opts)
                times.append(st.wall_time)
            counters[b] = st.counters()
            row[b] = statistics.median(times)
        kernels.use_backend(prev)
        row["probes"] = counters[backends[0]]["probes"]
        row["same_counters"] = all(c == counters[backends[0]] for c in counters.values())
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)
    cols = ["case", "probes", *backends, "speedup", "same_counters"]
    fmt = lambda v: f"{v:.4f}" if isinstance(v, float) else str(v)  # noqa: E731
    table = [cols] + [[fmt(r.get(c, "-")) for c in cols] for r in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    for r in table:
        print("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["same_counters"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
