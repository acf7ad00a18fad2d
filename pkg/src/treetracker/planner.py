"""Left-deep plan compilation and bushy-plan decomposition.

Plan positions are 1-based throughout the public surface: ``steps[0]`` is
position 1, and ``PlanStep.parent_pos`` holds 1-based positions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

from .query import Atom, Query, QueryError, find_parent, gyo_reduce, is_gyo_order


class PlanError(Exception):
    pass


@dataclass(frozen=True)
class PlanStep:
    atom: Atom
    keys: tuple[str, ...]
    parent_pos: int | None = None
    cyclic_parent: bool = False


@dataclass
class Plan:
    query: Query
    steps: list[PlanStep]
    # 1-based (start, end) inclusive position ranges, one per convolution tree
    segments: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def step(self, pos: int) -> PlanStep:
        return self.steps[pos - 1]

    @property
    def atoms(self) -> list[Atom]:
        return [s.atom for s in self.steps]

    @property
    def aliases(self) -> list[str]:
        return [s.atom.alias for s in self.steps]

    @property
    def variables(self) -> tuple[str, ...]:
        """Variables in discovery order, i.e. the output column order."""
        seen: dict[str, None] = {}
        for s in self.steps:
            for v in s.atom.vars:
                seen.setdefault(v)
        return tuple(seen)

    def describe(self) -> str:
        lines = []
        for i, s in enumerate(self.steps, start=1):
            if s.parent_pos is None:
                par = "-"
            else:
                par = self.steps[s.parent_pos - 1].atom.alias
                if s.cyclic_parent:
                    par += " (cyclic, no delete)"
            keys = ",".join(s.keys) if s.keys else "()"
            lines.append(f"{i:>3}  {s.atom.alias:<8} keys={{{keys}}}  parent={par}")
        return "\n".join(lines)


def _resolve_order(q: Query, order: Sequence[Union[Atom, str]]) -> list[Atom]:
    atoms = []
    for o in order:
        if isinstance(o, Atom):
            atoms.append(o)
        else:
            try:
                atoms.append(q[o])
            except QueryError as exc:
                raise PlanError(str(exc)) from None
    if sorted(a.alias for a in atoms) != sorted(a.alias for a in q.atoms) or len(atoms) != len(q):
        raise PlanError(
            f"plan {[a.alias for a in atoms]} is not a permutation of the query atoms "
            f"{[a.alias for a in q.atoms]}"
        )
    for a in atoms:
        if q[a.alias] != a:
            raise PlanError(f"plan atom {a} does not match the query's atom {q[a.alias]}")
    return atoms


def prefix_keys(prefix: Sequence[Atom], a: Atom) -> tuple[str, ...]:
    """Variables of ``a`` already bound by earlier plan steps, in ``a``'s order."""
    bound: set[str] = set()
    for b in prefix:
        bound.update(b.vars)
    return tuple(v for v in a.vars if v in bound)


def compile_plan(q: Query, order: Sequence[Union[Atom, str]]) -> Plan:
    atoms = _resolve_order(q, order)
    steps = []
    for i, a in enumerate(atoms):
        prefix = atoms[: i + 1]
        keys = prefix_keys(atoms[:i], a)
        parent = find_parent(prefix, a) if i > 0 else None
        parent_pos = atoms.index(parent) + 1 if parent is not None else None
        steps.append(PlanStep(a, keys, parent_pos, False))
    return Plan(q, steps, [(1, len(steps))])


def validate_reverse_gyo(q: Query, order: Sequence[Union[Atom, str]]) -> bool:
    atoms = _resolve_order(q, order)
    return is_gyo_order(q, list(reversed(atoms)))


def default_order(q: Query) -> list[Atom]:
    """The listed order when it already is a reverse GYO order, else a reversed GYO order.

    Raises QueryError for cyclic or disconnected queries.
    """
    listed = list(q.atoms)
    if is_gyo_order(q, list(reversed(listed))):
        return listed
    res = gyo_reduce(q)
    if not res.acyclic:
        raise QueryError("query is cyclic; it has no GYO reduction order")
    return res.plan_order


def plan_tree(plan: Plan) -> dict[str, str | None]:
    """Parent map induced by the plan's backjump targets."""
    return {
        s.atom.alias: (plan.step(s.parent_pos).atom.alias if s.parent_pos is not None else None)
        for s in plan.steps
    }


# ---------------------------------------------------------------- bushy plans

BushyPlan = Union[str, tuple]  # leaf alias or (left, right)


@dataclass
class Stage:
    """One left-deep step of a decomposed bushy plan.

    ``output`` names the temporary the stage materializes; the final stage
    has ``output=None`` and produces the query result.
    """

    query: Query
    order: list[str]
    output: str | None

    def plan(self) -> Plan:
        return compile_plan(self.query, self.order)


def bushy_leaves(bp: BushyPlan) -> list[str]:
    if isinstance(bp, str):
        return [bp]
    left, right = bp
    return bushy_leaves(left) + bushy_leaves(right)


def count_right_subtrees(bp: BushyPlan) -> int:
    if isinstance(bp, str):
        return 0
    left, right = bp
    return (0 if isinstance(right, str) else 1) + count_right_subtrees(left) + count_right_subtrees(right)


def decompose_bushy(q: Query, bp: BushyPlan, prefix: str = "M") -> list[Stage]:
    """Split a bushy plan into left-deep stages, innermost right subtrees first."""
    leaves = bushy_leaves(bp)
    if sorted(leaves) != sorted(a.alias for a in q.atoms):
        raise PlanError(f"bushy plan leaves {leaves} are not a permutation of the query atoms")
    stages: list[Stage] = []
    counter = [0]

    def spine(node: BushyPlan) -> list[Atom]:
        if isinstance(node, str):
            return [q[node]]
        left, right = node
        out = spine(left)
        if isinstance(right, str):
            out.append(q[right])
        else:
            out.append(materialize(right))
        return out

    def materialize(node: BushyPlan) -> Atom:
        atoms = spine(node)
        counter[0] += 1
        name = f"{prefix}{counter[0]}"
        seen: dict[str, None] = {}
        for a in atoms:
            for v in a.vars:
                seen.setdefault(v)
        stages.append(Stage(Query(tuple(atoms)), [a.alias for a in atoms], name))
        return Atom(name, name, tuple(seen))

    final = spine(bp)
    stages.append(Stage(Query(tuple(final)), [a.alias for a in final], None))
    return stages


def parse_bushy(text: str) -> BushyPlan:
    """Parse ``((A B) (C D))``; every internal node must have two children."""
    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    pos = 0

    def parse() -> BushyPlan:
        nonlocal pos
        if pos >= len(tokens):
            raise PlanError("unexpected end of bushy plan")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(parse())
            if pos >= len(tokens):
                raise PlanError("unbalanced parentheses in bushy plan")
            pos += 1
            if len(items) == 1:
                return items[0]
            if len(items) < 2:
                raise PlanError("empty join node in bushy plan")
            # (A B C) reads as left-deep ((A B) C)
            node = (items[0], items[1])
            for it in items[2:]:
                node = (node, it)
            return node
        if tok == ")":
            raise PlanError("unbalanced parentheses in bushy plan")
        return tok

    tree = parse()
    if pos != len(tokens):
        raise PlanError("trailing tokens after bushy plan")
    return tree


def format_bushy(bp: BushyPlan) -> str:
    if isinstance(bp, str):
        return bp
    return f"({format_bushy(bp[0])} {format_bushy(bp[1])})"


def parse_plan(text: str) -> list[str]:
    """Plan file: one atom alias per line (``#`` starts a comment)."""
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.extend(line.split())
    return out


def load_plan(path: str | Path) -> list[str]:
    return parse_plan(Path(path).read_text(encoding="utf-8"))
