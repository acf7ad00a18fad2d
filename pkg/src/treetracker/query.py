"""Full conjunctive queries and the acyclicity toolkit.

Atom-list order matters: every search (ear, parent) scans atoms in that order
and takes the first hit, which keeps GYO orders and plans deterministic.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class QueryError(Exception):
    pass


@dataclass(frozen=True)
class Atom:
    """``alias=relation(vars)``. The alias identifies the atom within a query."""

    alias: str
    relation: str
    vars: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise QueryError(f"atom {self.alias}: variables must be distinct, got {self.vars}")

    @property
    def varset(self) -> frozenset[str]:
        return frozenset(self.vars)

    def __str__(self) -> str:
        head = self.relation if self.alias == self.relation else f"{self.alias}={self.relation}"
        return f"{head}({','.join(self.vars)})"


def atom(spec: str) -> Atom:
    """Shorthand constructor: ``atom("S(x,y,j)")`` or ``atom("S1=S(x,y)")``."""
    return parse_atom(spec)


@dataclass(frozen=True)
class Query:
    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        aliases = [a.alias for a in self.atoms]
        if len(set(aliases)) != len(aliases):
            raise QueryError(f"atom aliases must be unique, got {aliases}")

    @classmethod
    def of(cls, *specs: str) -> "Query":
        return cls(tuple(parse_atom(s) for s in specs))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __contains__(self, a: object) -> bool:
        return a in self.atoms

    def __getitem__(self, alias: str) -> Atom:
        for a in self.atoms:
            if a.alias == alias:
                return a
        raise QueryError(f"no atom with alias {alias!r}")

    @property
    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for a in self.atoms:
            for v in a.vars:
                seen.setdefault(v)
        return tuple(seen)

    def without(self, a: Atom) -> "Query":
        return Query(tuple(b for b in self.atoms if b != a))

    def subquery(self, atoms: Iterable[Atom]) -> "Query":
        return Query(tuple(atoms))

    def reordered(self, aliases: Sequence[str]) -> "Query":
        return Query(tuple(self[x] for x in aliases))

    def is_connected(self) -> bool:
        if not self.atoms:
            return True
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            vi = self.atoms[i].varset
            for j, b in enumerate(self.atoms):
                if j not in seen and vi & b.varset:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == len(self.atoms)

    def __str__(self) -> str:
        return "\n".join(str(a) for a in self.atoms)


def key_schema(q: Query | Sequence[Atom], a: Atom) -> frozenset[str]:
    """Variables of ``a`` shared with any other atom of ``q``."""
    atoms = q.atoms if isinstance(q, Query) else tuple(q)
    if a not in atoms:
        raise QueryError(f"atom {a} is not part of the query")
    others: set[str] = set()
    for b in atoms:
        if b != a:
            others.update(b.vars)
    return a.varset & others


def find_parent(q: Query | Sequence[Atom], a: Atom) -> Atom | None:
    """First other atom (in list order) whose variables cover ``a``'s key schema."""
    atoms = q.atoms if isinstance(q, Query) else tuple(q)
    keys = key_schema(atoms, a)
    for b in atoms:
        if b != a and keys <= b.varset:
            return b
    return None


def find_ear(q: Query | Sequence[Atom]) -> Atom | None:
    atoms = q.atoms if isinstance(q, Query) else tuple(q)
    if not atoms:
        raise QueryError("find_ear on an empty query")
    if len(atoms) == 1:
        return atoms[0]
    for a in atoms:
        if find_parent(atoms, a) is not None:
            return a
    return None


@dataclass
class JoinForest:
    parent_of: dict[str, str | None] = field(default_factory=dict)

    @property
    def roots(self) -> list[str]:
        return [a for a, p in self.parent_of.items() if p is None]

    def children(self, alias: str) -> list[str]:
        return [c for c, p in self.parent_of.items() if p == alias]

    def edges(self) -> list[tuple[str, str]]:
        return [(c, p) for c, p in self.parent_of.items() if p is not None]


@dataclass
class GyoResult:
    acyclic: bool
    order: list[Atom]
    forest: JoinForest
    residual: list[Atom]

    @property
    def plan_order(self) -> list[Atom]:
        """Reverse of the GYO order: a plan with the join-tree root first."""
        return list(reversed(self.order))


def gyo_reduce(q: Query) -> GyoResult:
    """Repeatedly strip ears, attaching each to its first parent.

    A non-empty residual with no ear means the query is cyclic; ``residual``
    then holds the irreducible atoms. Disconnected queries are rejected.
    """
    if not q.atoms:
        raise QueryError("GYO reduction of an empty query")
    if not q.is_connected():
        raise QueryError("query is disconnected (Cartesian product); not supported")
    remaining = list(q.atoms)
    forest = JoinForest({a.alias: None for a in q.atoms})
    order: list[Atom] = []
    while remaining:
        ear = find_ear(remaining)
        if ear is None:
            return GyoResult(False, order, forest, remaining)
        parent = find_parent(remaining, ear) if len(remaining) > 1 else None
        forest.parent_of[ear.alias] = parent.alias if parent is not None else None
        order.append(ear)
        remaining.remove(ear)
    return GyoResult(True, order, forest, [])


def is_acyclic(q: Query) -> bool:
    return gyo_reduce(q).acyclic


def is_gyo_order(q: Query, order: Sequence[Atom]) -> bool:
    """Each atom must be an ear of the suffix that starts at it."""
    if sorted(a.alias for a in order) != sorted(a.alias for a in q.atoms):
        return False
    order = list(order)
    for i in range(len(order) - 1):
        if find_parent(order[i:], order[i]) is None:
            return False
    return True


def is_join_tree(atoms: Sequence[Atom], parent_of: Mapping[str, str | None]) -> bool:
    """Check that ``parent_of`` is a single tree with the connected-subtree property."""
    by_alias = {a.alias: a for a in atoms}
    if set(parent_of) != set(by_alias):
        return False
    roots = [a for a, p in parent_of.items() if p is None]
    if len(roots) != 1:
        return False
    # every node must reach the root without cycling
    for a in by_alias:
        seen = set()
        cur: str | None = a
        while cur is not None:
            if cur in seen or cur not in by_alias:
                return False
            seen.add(cur)
            cur = parent_of[cur]
    adj: dict[str, set[str]] = {a: set() for a in by_alias}
    for c, p in parent_of.items():
        if p is not None:
            adj[c].add(p)
            adj[p].add(c)
    variables = {v for a in atoms for v in a.vars}
    for v in variables:
        holders = {a.alias for a in atoms if v in a.varset}
        start = next(iter(holders))
        seen = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for m in adj[n]:
                if m in holders and m not in seen:
                    seen.add(m)
                    stack.append(m)
        if seen != holders:
            return False
    return True


_ATOM_RE = re.compile(
    r"^\s*(?:(?P<alias>[A-Za-z_][\w]*)\s*=\s*)?(?P<rel>[A-Za-z_][\w]*)\s*\((?P<vars>[^)]*)\)\s*$"
)


def parse_atom(text: str) -> Atom:
    m = _ATOM_RE.match(text)
    if not m:
        raise QueryError(f"cannot parse atom {text!r}; expected Alias=Rel(v1,v2,...)")
    rel = m.group("rel")
    alias = m.group("alias") or rel
    vars_ = tuple(v.strip() for v in m.group("vars").split(",") if v.strip())
    return Atom(alias, rel, vars_)


def parse_query(text: str) -> Query:
    """One atom per line; blank lines and ``#`` comments are ignored."""
    atoms = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            atoms.append(parse_atom(line))
    if not atoms:
        raise QueryError("query text contains no atoms")
    return Query(tuple(atoms))


def load_query(path: str | Path) -> Query:
    return parse_query(Path(path).read_text(encoding="utf-8"))


def format_query(q: Query) -> str:
    return "\n".join(str(a) for a in q.atoms) + "\n"
