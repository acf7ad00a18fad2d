"""Instance builders and comparison helpers shared by the test modules."""
from __future__ import annotations

import random

from treetracker.catalog import Database, Relation
from treetracker.engine import CollectSink, oracle_join, sort_key
from treetracker.query import Query
from treetracker.workloads import WorkloadSpec, gen_box, gen_random_acyclic

OPT_COMBOS = ("", "ng", "dp", "ng,dp")


def rows(sink: CollectSink, q: Query) -> list[tuple]:
    return sorted(sink.project(q.variables), key=sort_key)


def db_of(**rels) -> Database:
    """``db_of(R=(("a","b"), [(1,2)]))``"""
    db = Database()
    for name, (attrs, data) in rels.items():
        db.add(Relation.from_rows(name, attrs, data))
    return db


def acyclic_instances(count: int, seed: int = 0, n: int = 8):
    """Seeded random acyclic workloads cycling through dangling fractions 0, 0.3, 0.7."""
    fractions = (0.0, 0.3, 0.7)
    for i in range(count):
        yield gen_random_acyclic(WorkloadSpec("random_acyclic", n, seed * 100_003 + i, fractions[i % 3]))


def box_instances(count: int, seed: int = 0):
    rnd = random.Random(seed)
    for i in range(count):
        yield gen_box(rnd.choice((2, 3)), seed=seed * 100_003 + i, density=rnd.choice((0.5, 0.7, 0.9)))


def oracle(w) -> list[tuple]:
    return oracle_join(w.query, w.db)


# acceptance results, printed by the terminal-summary hook in conftest
ACCEPTANCE: dict[int, str] = {}
