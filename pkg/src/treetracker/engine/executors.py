"""HJ, TTJ and YA drivers on top of the probe kernels, plus semijoin and staging."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from ..catalog import Database, Relation, Tuple
from ..planner import Plan, Stage, compile_plan, plan_tree, validate_reverse_gyo
from ..query import Atom, Query, QueryError, gyo_reduce, is_gyo_order
from . import kernels
from .compiled import ExecutionError, compile_for_execution
from .sinks import CollectSink, CountSink, OutputSink
from .stats import ExecStats

TTJ_OPTIONS = frozenset({"ng", "dp"})


@dataclass
class ExecTrace:
    """Backjump and deletion log, with 1-based plan positions.

    ``backjumps`` holds ``(from_pos, to_pos, kind)`` where kind is ``"miss"``
    or ``"dp"``. ``deletions`` holds ``(pos, origin_pos, tuple)``: the tuple
    removed at ``pos`` because of a backjump that started at ``origin_pos``.
    """

    backjumps: list[tuple[int, int, str]] = field(default_factory=list)
    deletions: list[tuple[int, int, Tuple]] = field(default_factory=list)

    def append_backjump(self, frm: int, to: int, kind: str) -> None:
        self.backjumps.append((frm + 1, to + 1, kind))

    def append_deletion(self, pos: int, origin: int, t: Tuple) -> None:
        self.deletions.append((pos + 1, origin + 1, t))


def bind_relations(plan_or_query: Union[Plan, Query], db: Mapping[str, Relation]) -> dict[str, Relation]:
    """Map each atom alias to the relation its atom names."""
    out = {}
    for a in plan_or_query.atoms:
        rel = db.get(a.relation)
        if rel is None:
            raise ExecutionError(f"relation {a.relation!r} (atom {a.alias}) is not in the database")
        out[a.alias] = rel
    return out


def _sink(sink: OutputSink | None) -> OutputSink:
    return sink if sink is not None else CountSink()


def _finish(stats: ExecStats, cp, result, t0: float) -> ExecStats:
    entries, fails, bj, dels, dps, ng_adds, ng_hits = result
    n = cp.n
    stats.entries_per_step = list(entries)
    stats.probes_per_step = list(entries[:n])
    stats.probes = sum(entries[:n])
    stats.step_entries = sum(entries)
    stats.output_count = entries[n]
    stats.probe_failures = fails
    stats.backjumps = bj
    stats.deletions = dels
    stats.dp_propagations = dps
    stats.nogood_adds = ng_adds
    stats.nogood_hits = ng_hits
    stats.build_scans += cp.build_scans
    stats.input_count = cp.input_count
    stats.wall_time = time.perf_counter() - t0
    return stats


def run_hj(
    plan: Plan,
    db: Mapping[str, Relation],
    sink: OutputSink | None = None,
    relations: Mapping[str, Relation] | None = None,
) -> ExecStats:
    """Pipelined left-deep hash join over ``plan``."""
    sink = _sink(sink)
    t0 = time.perf_counter()
    cp = compile_for_execution(plan, relations if relations is not None else bind_relations(plan, db))
    sink.open(cp.variables)
    try:
        result = kernels.hj(cp, sink.emit)
    finally:
        sink.close()
    return _finish(ExecStats(algo="hj"), cp, result, t0)


def parse_opts(opts: Union[str, Sequence[str], None]) -> frozenset[str]:
    if opts is None:
        return frozenset()
    if isinstance(opts, str):
        opts = [o for o in opts.replace("+", ",").split(",") if o]
    out = frozenset(o.strip().lower() for o in opts)
    unknown = out - TTJ_OPTIONS
    if unknown:
        raise ExecutionError(f"unknown TTJ option(s): {', '.join(sorted(unknown))}")
    return out


def run_ttj(
    plan: Plan,
    db: Mapping[str, Relation],
    sink: OutputSink | None = None,
    opts: Union[str, Sequence[str], None] = None,
    trace: ExecTrace | None = None,
    relations: Mapping[str, Relation] | None = None,
) -> ExecStats:
    """TreeTracker join: hash join that backjumps on a miss and deletes the culprit.

    Steps flagged ``cyclic_parent`` still backjump but never delete from the
    target. ``opts`` may contain ``ng`` (no-good list at the root) and ``dp``
    (deletion propagation).
    """
    flags = parse_opts(opts)
    sink = _sink(sink)
    t0 = time.perf_counter()
    cp = compile_for_execution(plan, relations if relations is not None else bind_relations(plan, db))
    sink.open(cp.variables)
    try:
        result = kernels.ttj(cp, sink.emit, "ng" in flags, "dp" in flags, trace)
    finally:
        sink.close()
    name = "ttj" + "".join(f"+{o}" for o in sorted(flags))
    return _finish(ExecStats(algo=name), cp, result, t0)


def semijoin(p: Relation, r: Relation, stats: ExecStats | None = None) -> Relation:
    """Tuples of ``p`` that agree with some tuple of ``r`` on the shared attributes."""
    if len(p) == 0 or len(r) == 0:
        # an empty side decides the result without scanning
        if stats is not None:
            stats.semijoin_removed += len(p)
        return p if len(p) == 0 else Relation(p.name, p.schema, ())
    shared = [a for a in p.schema.attrs if a in r.schema]
    if stats is not None:
        stats.semijoin_scans += len(p) + len(r)
    if not shared:
        kept = p.tuples if len(r) else ()
    else:
        rcols = r.schema.positions(shared)
        pcols = p.schema.positions(shared)
        keys = {tuple(t.values[c] for c in rcols) for t in r.tuples}
        kept = tuple(t for t in p.tuples if tuple(t.values[c] for c in pcols) in keys)
    if stats is not None:
        stats.semijoin_removed += len(p) - len(kept)
    if len(kept) == len(p):
        return p
    return Relation(p.name, p.schema, kept)


def run_ya(
    q: Query,
    order: Sequence[Union[Atom, str]],
    db: Mapping[str, Relation],
    sink: OutputSink | None = None,
    relations: Mapping[str, Relation] | None = None,
) -> ExecStats:
    """One-pass Yannakakis: bottom-up semijoins along ``order``, then HJ on its reverse.

    Each atom is semijoined into its parent in the plan built from the
    reversed order. When the reduced root comes out empty the join phase
    is a single root lookup and no index is built.
    """
    sink = _sink(sink)
    atoms = [q[o] if isinstance(o, str) else o for o in order]
    if not is_gyo_order(q, atoms):
        raise ExecutionError(f"{[a.alias for a in atoms]} is not a GYO reduction order of the query")
    stats = ExecStats(algo="ya")
    t0 = time.perf_counter()
    base = relations if relations is not None else bind_relations(q, db)
    # semijoins match on attribute names, so rename columns to the atom's variables
    rels = {a.alias: base[a.alias].renamed(a.alias, a.vars) for a in atoms}
    stats.input_count = sum(len(r) for r in rels.values())
    plan = compile_plan(q, list(reversed(atoms)))
    parent_of = plan_tree(plan)
    for a in atoms:
        parent = parent_of[a.alias]
        if parent is not None:
            rels[parent] = semijoin(rels[parent], rels[a.alias], stats)
    if len(rels[plan.steps[0].atom.alias]) == 0:
        return _ya_empty(stats, plan, sink, t0)
    join_stats = run_hj(plan, db, sink, relations=rels)
    join_stats.algo = "ya"
    join_stats.semijoin_scans = stats.semijoin_scans
    join_stats.semijoin_removed = stats.semijoin_removed
    join_stats.input_count = stats.input_count
    join_stats.wall_time = time.perf_counter() - t0
    return join_stats


def _ya_empty(stats: ExecStats, plan: Plan, sink: OutputSink, t0: float) -> ExecStats:
    sink.open(plan.variables)
    sink.close()
    stats.early_exit = True
    stats.probes = stats.step_entries = 1
    stats.probes_per_step = [1] + [0] * (len(plan) - 1)
    stats.entries_per_step = stats.probes_per_step + [0]
    stats.wall_time = time.perf_counter() - t0
    return stats


def segment_completions(plan: Plan, stats: ExecStats) -> list[int]:
    """Per convolution tree, how many times execution got past its last step.

    A diagnostic for the size of each tree's partial join; the last entry
    equals ``output_count``.
    """
    return [stats.entries_per_step[end] for _, end in plan.segments]


def default_ya_order(q: Query) -> list[Atom]:
    res = gyo_reduce(q)
    if not res.acyclic:
        raise ExecutionError("YA needs an acyclic query; this one is cyclic")
    return res.order


def run_plan(
    algo: str,
    plan: Plan,
    db: Mapping[str, Relation],
    sink: OutputSink | None = None,
    opts=None,
    trace: ExecTrace | None = None,
    relations: Mapping[str, Relation] | None = None,
) -> ExecStats:
    """Dispatch by name: ``hj``, ``ttj`` (with ``opts``) or ``ya``.

    YA ignores the plan's order unless it is a reverse GYO order, in which
    case it uses the reversed plan as its reduction order.
    """
    if algo == "hj":
        return run_hj(plan, db, sink, relations=relations)
    if algo == "ttj":
        return run_ttj(plan, db, sink, opts, trace, relations=relations)
    if algo == "ya":
        q = plan.query
        if validate_reverse_gyo(q, plan.atoms):
            order = list(reversed(plan.atoms))
        else:
            try:
                order = default_ya_order(q)
            except QueryError as exc:
                raise ExecutionError(f"YA cannot run this query: {exc}") from None
        return run_ya(q, order, db, sink, relations=relations)
    raise ExecutionError(f"unknown algorithm {algo!r}")


def _ya_ok(q: Query) -> bool:
    try:
        return gyo_reduce(q).acyclic
    except QueryError:
        return False


def run_stages(
    stages: Sequence[Stage],
    db: Mapping[str, Relation],
    algo: str = "hj",
    sink: OutputSink | None = None,
    opts=None,
) -> ExecStats:
    """Run stages in order, loading each temporary as a relation for later ones."""
    sink = _sink(sink)
    work = Database(dict(db))
    total = ExecStats(algo=f"staged-{algo}")
    t0 = time.perf_counter()
    temps = {s.output for s in stages if s.output is not None}
    inputs = 0
    for stage in stages:
        plan = stage.plan()
        rels = bind_relations(plan, work)
        # YA needs a connected acyclic stage; others fall back to HJ
        stage_algo = algo if algo != "ya" or _ya_ok(stage.query) else "hj"
        if stage.output is None:
            st = run_plan(stage_algo, plan, work, sink, opts, relations=rels)
            total.absorb(st)
            total.output_count = st.output_count
        else:
            collect = CollectSink()
            st = run_plan(stage_algo, plan, work, collect, opts, relations=rels)
            total.absorb(st)
            temp = Relation.from_rows(stage.output, collect.header, collect.rows)
            work.add(temp)
            total.materializations += 1
        inputs += sum(len(r) for r in rels.values() if r.name not in temps)
    total.input_count = inputs
    total.wall_time = time.perf_counter() - t0
    return total
