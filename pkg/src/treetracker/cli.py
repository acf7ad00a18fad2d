"""Command-line entry point: ``gen``, ``explain``, ``run`` and ``bench``.

Exit status is 0 on success, 2 on validation errors, 1 on I/O errors.
"""
from __future__ import annotations

import argparse
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .catalog import CatalogError, Database, LoadError
from .convolution import (
    ConvolutionError,
    convolution_stages,
    is_rooted,
    load_convolution,
    plan_from_rooted,
    validate_convolution,
)
from .engine import (
    CollectSink,
    CountSink,
    CsvSink,
    ExecStats,
    ExecutionError,
    parse_opts,
    run_plan,
    run_stages,
    write_records,
)
from .planner import (
    Plan,
    PlanError,
    compile_plan,
    decompose_bushy,
    default_order,
    parse_bushy,
    parse_plan,
    plan_tree,
    validate_reverse_gyo,
)
from .query import Query, QueryError, gyo_reduce, load_query
from .workloads import FAMILIES, WorkloadSpec, generate

ALGOS = ("hj", "ttj", "ya")


class ValidationError(Exception):
    pass


@dataclass
class RunConfig:
    db_dir: Path
    query_file: Path
    algo: str = "ttj"
    plan_file: Path | None = None
    conv_file: Path | None = None
    opts: frozenset[str] = field(default_factory=frozenset)
    sink_mode: str = "count"
    stats_out: Path | None = None

    def validate(self) -> None:
        if self.algo not in ALGOS:
            raise ValidationError(f"unknown algorithm {self.algo!r}; choose from {', '.join(ALGOS)}")
        if self.conv_file is not None and self.algo != "ttj":
            raise ValidationError("--conv is only valid with --algo ttj")
        if self.opts and self.algo != "ttj":
            raise ValidationError("--opts is only valid with --algo ttj")


@dataclass
class Prepared:
    query: Query
    db: Database
    plan: Plan | None  # None when executed stage-wise
    stages: list | None
    reverse_gyo: bool


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def prepare(cfg: RunConfig) -> Prepared:
    db = Database.from_dir(cfg.db_dir)
    q = load_query(cfg.query_file)
    if cfg.conv_file is not None:
        conv = load_convolution(cfg.conv_file)
        if not validate_convolution(q, conv):
            raise ValidationError("convolution does not cover the query with join trees")
        if is_rooted(conv):
            return Prepared(q, db, plan_from_rooted(q, conv), None, False)
        _warn("convolution is not rooted; materializing nested trees stage-wise")
        return Prepared(q, db, None, convolution_stages(q, conv), False)
    if cfg.plan_file is not None:
        text = Path(cfg.plan_file).read_text(encoding="utf-8")
        if text.lstrip().startswith("("):
            stages = decompose_bushy(q, parse_bushy(text))
            if len(stages) == 1:
                plan = stages[0].plan()
                return Prepared(q, db, plan, None, validate_reverse_gyo(q, plan.atoms))
            return Prepared(q, db, None, stages, False)
        plan = compile_plan(q, parse_plan(text))
        return Prepared(q, db, plan, None, validate_reverse_gyo(q, plan.atoms))
    res = gyo_reduce(q)
    if res.acyclic:
        plan = compile_plan(q, default_order(q))
        return Prepared(q, db, plan, None, True)
    if cfg.algo == "ya":
        raise ValidationError("query is cyclic; YA needs an acyclic query (or use --algo ttj --conv)")
    _warn("query is cyclic and no plan was given; using the listed atom order")
    return Prepared(q, db, compile_plan(q, [a.alias for a in q.atoms]), None, False)


def execute(prep: Prepared, algo: str, opts, sink) -> ExecStats:
    if prep.stages is not None:
        stats = run_stages(prep.stages, prep.db, algo, sink, opts)
    else:
        stats = run_plan(algo, prep.plan, prep.db, sink, opts)
    stats.reverse_gyo = prep.reverse_gyo
    return stats


def cmd_run(cfg: RunConfig) -> ExecStats:
    cfg.validate()
    prep = prepare(cfg)
    if not prep.reverse_gyo and cfg.algo in ("ttj", "ya") and prep.stages is None and cfg.conv_file is None:
        _warn("plan is not the reverse of a GYO order; the linear-time bound does not apply")
    if cfg.sink_mode == "collect":
        sink = CollectSink()
    elif cfg.sink_mode == "count":
        sink = CountSink()
    else:
        sink = CsvSink(cfg.sink_mode)
    stats = execute(prep, cfg.algo, cfg.opts, sink)
    if isinstance(sink, CollectSink):
        print(",".join(sink.header))
        for row in sink.rows:
            print(",".join(str(v) for v in row))
    if cfg.stats_out is not None:
        stats.write(cfg.stats_out)
    return stats


def explain(db_dir: Path | None, query_file: Path, plan_file: Path | None = None, conv_file: Path | None = None) -> str:
    q = load_query(query_file)
    if db_dir is not None:
        Database.from_dir(db_dir)  # surface load errors early
    lines = ["query:"] + [f"  {a}" for a in q.atoms]
    res = gyo_reduce(q)
    if res.acyclic:
        default = compile_plan(q, default_order(q))
        lines.append("verdict: acyclic")
        lines.append("gyo order: [" + ", ".join(reversed(default.aliases)) + "]")
        lines.append("join tree:")
        for child, parent in plan_tree(default).items():
            lines.append(f"  {child} -> {parent}" if parent else f"  root: {child}")
    else:
        lines.append("verdict: cyclic")
        lines.append("residual: [" + ", ".join(a.alias for a in res.residual) + "]")
    plan = None
    if conv_file is not None:
        conv = load_convolution(conv_file)
        if not validate_convolution(q, conv):
            raise ValidationError("convolution does not cover the query with join trees")
        lines.append(f"convolution: {conv} (rooted={is_rooted(conv)})")
        if is_rooted(conv):
            plan = plan_from_rooted(q, conv)
        else:
            lines.append("stages:")
            for st in convolution_stages(q, conv):
                lines.append(f"  [{', '.join(st.order)}] -> {st.output or 'result'}")
    elif plan_file is not None:
        text = Path(plan_file).read_text(encoding="utf-8")
        if text.lstrip().startswith("("):
            lines.append("stages:")
            for st in decompose_bushy(q, parse_bushy(text)):
                lines.append(f"  [{', '.join(st.order)}] -> {st.output or 'result'}")
        else:
            plan = compile_plan(q, parse_plan(text))
    elif res.acyclic:
        plan = default
    if plan is not None:
        lines.append("plan: [" + ", ".join(plan.aliases) + "]")
        lines.append(f"reverse gyo: {validate_reverse_gyo(q, plan.atoms)}")
        if len(plan.segments) > 1:
            lines.append("segments: " + " ".join(f"{a}-{b}" for a, b in plan.segments))
        lines.append(plan.describe())
    return "\n".join(lines)


def _parse_algo_list(spec: str) -> list[tuple[str, frozenset[str]]]:
    out = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        algo, *opts = item.split("+")
        if algo not in ALGOS:
            raise ValidationError(f"unknown algorithm {algo!r}")
        if opts and algo != "ttj":
            raise ValidationError("options apply to ttj only")
        out.append((algo, parse_opts(opts)))
    return out


def cmd_bench(cfg: RunConfig, algos: Sequence[tuple[str, frozenset[str]]], repeats: int) -> list[dict]:
    if repeats < 1:
        raise ValidationError("--repeats must be >= 1")
    rows = []
    for algo, opts in algos:
        sub = RunConfig(cfg.db_dir, cfg.query_file, algo, cfg.plan_file, cfg.conv_file, opts)
        sub.validate()
        try:
            prep = prepare(sub)
        except ValidationError as exc:
            if len(algos) == 1:
                raise
            _warn(f"skipping {algo}: {exc}")
            continue
        runs = [execute(prep, algo, opts, CountSink()) for _ in range(repeats)]
        first = runs[0].counters()
        row = dict(first)
        row["runs"] = len(runs)
        row["deterministic"] = all(r.counters() == first for r in runs)
        row["wall_time"] = statistics.median(r.wall_time for r in runs)
        rows.append(row)
    return rows


BENCH_COLUMNS = (
    "algo", "runs", "wall_time", "probes", "probe_failures", "backjumps", "deletions",
    "nogood_hits", "semijoin_scans", "build_scans", "output_count",
)


def format_table(rows: list[dict], columns: Sequence[str] = BENCH_COLUMNS) -> str:
    def fmt(v) -> str:
        return f"{v:.6f}" if isinstance(v, float) else str(v)

    cells = [list(columns)] + [[fmt(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)


def _add_common(p: argparse.ArgumentParser, need_db: bool = True) -> None:
    p.add_argument("--db", type=Path, required=need_db, help="directory of <relation>.csv files")
    p.add_argument("--query", type=Path, required=True, help="query file, one atom per line")
    p.add_argument("--plan", type=Path, help="plan file: aliases one per line, or a bushy tree")
    p.add_argument("--conv", type=Path, help="tree convolution file (ttj only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treetracker", description="Generate workloads, explain plans, and run or benchmark joins."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a workload directory")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--dangling", type=float, default=0.0)
    g.add_argument("--out", type=Path, required=True)

    e = sub.add_parser("explain", help="show acyclicity, GYO order, join tree and plan")
    _add_common(e, need_db=False)
    e.add_argument("--algo", default="ttj")

    r = sub.add_parser("run", help="execute one algorithm")
    _add_common(r)
    r.add_argument("--algo", choices=ALGOS, default="ttj")
    r.add_argument("--opts", default="", help="comma list of ttj options: ng,dp")
    r.add_argument("--sink", default="count", help="collect | count | <output.csv>")
    r.add_argument("--stats", type=Path, help="write stats (json if *.json, else key=value)")

    b = sub.add_parser("bench", help="repeat several algorithms and report medians")
    _add_common(b)
    b.add_argument("--algo", default="hj,ttj,ya", help="comma list, e.g. hj,ttj,ttj+ng,ya")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--stats", type=Path, help="structured output (json or key=value)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            spec = WorkloadSpec(args.family, args.n, args.seed, args.dangling)
            w = generate(spec)
            w.write(args.out)
            print(f"wrote {args.family} workload to {args.out}")
        elif args.command == "explain":
            print(explain(args.db, args.query, args.plan, args.conv))
        elif args.command == "run":
            cfg = RunConfig(args.db, args.query, args.algo, args.plan, args.conv,
                            parse_opts(args.opts), args.sink, args.stats)
            stats = cmd_run(cfg)
            if args.sink != "collect":
                print(str(stats))
            else:
                print(str(stats), file=sys.stderr)
        else:
            cfg = RunConfig(args.db, args.query, "ttj", args.plan, args.conv)
            rows = cmd_bench(cfg, _parse_algo_list(args.algo), args.repeats)
            print(format_table(rows))
            if args.stats is not None:
                write_records(rows, args.stats)
    except (LoadError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, QueryError, PlanError, ConvolutionError, ExecutionError, CatalogError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
