"""Brute-force nested-loop join, used as the independent correctness oracle."""
from __future__ import annotations

from ..catalog import Database
from ..query import Query


def sort_key(row: tuple) -> tuple:
    return tuple((type(v).__name__, v) for v in row)


def oracle_join(q: Query, db: Database) -> list[tuple]:
    """Every assignment of ``q.variables`` satisfying all atoms, sorted.

    Rows are scanned without indexes; duplicates in bag-mode inputs yield
    duplicate output rows.
    """
    variables = q.variables
    atoms = list(q.atoms)
    tables = []
    for a in atoms:
        rel = db.relation(a.relation)
        if len(rel.schema) != len(a.vars):
            raise ValueError(f"atom {a} has arity {len(a.vars)}, relation has {len(rel.schema)}")
        tables.append([t.values for t in rel.tuples])
    out: list[tuple] = []
    binding: dict[str, object] = {}

    def visit(i: int) -> None:
        if i == len(atoms):
            out.append(tuple(binding[v] for v in variables))
            return
        vars_ = atoms[i].vars
        for row in tables[i]:
            added = []
            ok = True
            for v, val in zip(vars_, row):
                if v in binding:
                    if binding[v] != val:
                        ok = False
                        break
                else:
                    binding[v] = val
                    added.append(v)
            if ok:
                visit(i + 1)
            for v in added:
                del binding[v]

    visit(0)
    out.sort(key=sort_key)
    return out
