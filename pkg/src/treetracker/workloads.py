"""Deterministic instance generators for tests, benchmarks and the CLI.

Every generator is a pure function of its arguments: the same spec gives
byte-identical relations.
"""
from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

from .catalog import Database, Relation
from .query import Atom, Query, key_schema

FAMILIES = ("example1", "box", "random_acyclic", "star")
BOX_CONVOLUTION = "(root:(S1 S2 S3 S4) R1 R2 R3 R4)"


@dataclass(frozen=True)
class WorkloadSpec:
    family: str
    n: int
    seed: int = 0
    dangling_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.dangling_fraction <= 1.0:
            raise ValueError("dangling_fraction must lie in [0, 1]")


@dataclass
class Workload:
    query: Query
    db: Database
    order: list[str]  # a plan; the reverse of a GYO order when the query is acyclic
    conv: str | None = None
    spec: WorkloadSpec | None = None

    def write(self, out: str | Path) -> None:
        """Emit CSVs plus query.txt / plan.txt (and conv.txt when present)."""
        out = Path(out)
        self.db.to_dir(out)
        (out / "query.txt").write_text("\n".join(str(a) for a in self.query.atoms) + "\n", encoding="utf-8")
        (out / "plan.txt").write_text("\n".join(self.order) + "\n", encoding="utf-8")
        if self.conv is not None:
            (out / "conv.txt").write_text(self.conv + "\n", encoding="utf-8")
        if self.spec is not None:
            (out / "spec.json").write_text(json.dumps(asdict(self.spec), indent=2) + "\n", encoding="utf-8")


def _db(*rels: Relation) -> Database:
    db = Database()
    for r in rels:
        db.add(r)
    return db


def gen_example1(n: int) -> Workload:
    """R(i,x)={(i,1)}, S(x,y,j)={(1,1,j)}, T(y,k)={(1,k)}, U(y,l)={(0,l)}; empty result."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = range(1, n + 1)
    db = _db(
        Relation.from_rows("R", ("i", "x"), [(i, 1) for i in rng]),
        Relation.from_rows("S", ("x", "y", "j"), [(1, 1, j) for j in rng]),
        Relation.from_rows("T", ("y", "k"), [(1, k) for k in rng]),
        Relation.from_rows("U", ("y", "l"), [(0, l) for l in rng]),
    )
    q = Query.of("R(i,x)", "S(x,y,j)", "T(y,k)", "U(y,l)")
    return Workload(q, db, ["R", "S", "T", "U"], spec=WorkloadSpec("example1", n))


def box_query() -> Query:
    return Query.of(
        "R1(x1,x2)", "R2(x2,x3)", "R3(x3,x4)", "R4(x4,x1)",
        "S1(x1,y)", "S2(x2,y)", "S3(x3,y)", "S4(x4,y)",
    )


def gen_box(n: int, seed: int = 0, density: float = 0.6) -> Workload:
    """The 4-cycle-plus-hub query; each relation keeps each pair of [n]^2 with prob ``density``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rnd = random.Random(seed)
    q = box_query()
    rels = []
    pairs = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1)]
    for a in q.atoms:
        rows = [p for p in pairs if rnd.random() < density]
        if not rows:
            rows = [rnd.choice(pairs)]
        rels.append(Relation.from_rows(a.relation, a.vars, rows))
    order = ["S1", "S2", "S3", "S4", "R1", "R2", "R3", "R4"]
    return Workload(q, _db(*rels), order, conv=BOX_CONVOLUTION, spec=WorkloadSpec("box", n, seed))


def random_join_tree(rnd: random.Random, max_atoms: int = 6, max_vars: int = 3) -> list[tuple[int | None, tuple[str, ...]]]:
    """Sample a join tree as ``(parent index, vars)`` per atom, parents first."""
    n_atoms = rnd.randint(1, max_atoms)
    counter = iter(range(10_000))

    def fresh() -> str:
        return f"v{next(counter)}"

    tree: list[tuple[int | None, tuple[str, ...]]] = [(None, tuple(fresh() for _ in range(rnd.randint(1, max_vars))))]
    for _ in range(n_atoms - 1):
        p = rnd.randrange(len(tree))
        pvars = tree[p][1]
        shared = rnd.sample(pvars, rnd.randint(1, min(len(pvars), max_vars - 1 if max_vars > 1 else 1)))
        extra = [fresh() for _ in range(rnd.randint(0, max_vars - len(shared)))]
        vars_ = list(shared) + extra
        rnd.shuffle(vars_)
        tree.append((p, tuple(vars_)))
    return tree


def gen_random_acyclic(spec: WorkloadSpec, max_atoms: int = 6) -> Workload:
    """Random join tree; relations are projections of sampled full assignments.

    With ``dangling_fraction`` f, ``round(f * |R|)`` tuples of each relation
    get a fresh, globally unique value on one shared variable, so they join
    with nothing. At f = 0 every tuple takes part in the result.
    """
    rnd = random.Random(spec.seed)
    tree = random_join_tree(rnd, max_atoms)
    atoms = [Atom(f"A{i}", f"A{i}", vars_) for i, (_, vars_) in enumerate(tree)]
    listed = atoms[:]
    rnd.shuffle(listed)
    q = Query(tuple(listed))
    variables = q.variables
    domain = rnd.randint(1, 3)
    n_assign = rnd.randint(1, spec.n)
    assignments = [{v: rnd.randint(1, domain) for v in variables} for _ in range(n_assign)]
    fresh = iter(range(1000, 10**9))
    rels = []
    for a in atoms:
        rows = list(dict.fromkeys(tuple(asg[v] for v in a.vars) for asg in assignments))
        keys = sorted(key_schema(q, a))
        n_dangle = round(spec.dangling_fraction * len(rows))
        if keys and n_dangle:
            for idx in rnd.sample(range(len(rows)), n_dangle):
                v = rnd.choice(keys)
                row = list(rows[idx])
                row[a.vars.index(v)] = next(fresh)
                rows[idx] = tuple(row)
        rels.append(Relation.from_rows(a.relation, a.vars, rows))
    order = [a.alias for a in atoms]
    return Workload(q, _db(*rels), order, spec=spec)


def gen_star(n: int, seed: int = 0, dangling_fraction: float = 0.5, dims: int = 3) -> Workload:
    """Fact table F(f,d1..dk) over dimension tables Di(di,ai), plan fact-first.

    ``dangling_fraction`` of each dimension's key values is left out of the
    dimension table, so fact rows carrying those keys fail at that dimension.
    """
    rnd = random.Random(seed)
    k = max(2, n // 4)
    dim_rels = []
    for d in range(1, dims + 1):
        keys = list(range(1, k + 1))
        missing = set(rnd.sample(keys, round(dangling_fraction * k)))
        rows = [(key, key * 10 + d) for key in keys if key not in missing]
        dim_rels.append(Relation.from_rows(f"D{d}", (f"d{d}", f"a{d}"), rows))
    fact_rows = [(f,) + tuple(rnd.randint(1, k) for _ in range(dims)) for f in range(1, n + 1)]
    fact = Relation.from_rows("F", ("f",) + tuple(f"d{d}" for d in range(1, dims + 1)), fact_rows)
    q = Query.of(
        "F(" + ",".join(["f"] + [f"d{d}" for d in range(1, dims + 1)]) + ")",
        *[f"D{d}(d{d},a{d})" for d in range(1, dims + 1)],
    )
    order = ["F"] + [f"D{d}" for d in range(1, dims + 1)]
    return Workload(q, _db(fact, *dim_rels), order, spec=WorkloadSpec("star", n, seed, dangling_fraction))


def gen_chain(n: int, length: int = 3) -> Workload:
    """All-matching chain R1(a1,a2) ⋈ R2(a2,a3) ⋈ ...: every tuple joins."""
    rels = []
    specs = []
    for i in range(1, length + 1):
        rels.append(Relation.from_rows(f"R{i}", (f"a{i}", f"a{i+1}"), [(v, v) for v in range(1, n + 1)]))
        specs.append(f"R{i}(a{i},a{i+1})")
    q = Query.of(*specs)
    return Workload(q, _db(*rels), [f"R{i}" for i in range(1, length + 1)])


def generate(spec: WorkloadSpec) -> Workload:
    if spec.family == "example1":
        return gen_example1(spec.n)
    if spec.family == "box":
        return gen_box(spec.n, spec.seed)
    if spec.family == "random_acyclic":
        return gen_random_acyclic(spec)
    return gen_star(spec.n, spec.seed, spec.dangling_fraction)
