"""Tree convolutions: nested join trees that split a cyclic query into acyclic parts.

Text form: ``(root:(S1 S2 S3 S4) R1 R2 R3 R4)``. Parentheses delimit a tree;
a nested parenthesized group is a node standing for an inner convolution;
``root:`` marks the node that roots its tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .planner import Plan, PlanError, PlanStep, Stage, prefix_keys
from .query import Atom, Query, QueryError, find_parent, gyo_reduce, is_gyo_order, is_join_tree


class ConvolutionError(Exception):
    pass


Node = Union[str, "Convolution"]


@dataclass
class Convolution:
    nodes: list[Node]
    root: int | None = None  # index into nodes of the ``root:`` node
    name: str = field(default="", compare=False)

    def nested(self) -> list["Convolution"]:
        return [n for n in self.nodes if isinstance(n, Convolution)]

    def aliases(self) -> list[str]:
        out: list[str] = []
        for n in self.nodes:
            out.extend(n.aliases() if isinstance(n, Convolution) else [n])
        return out

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.nested()), default=0)

    def __str__(self) -> str:
        parts = []
        for i, n in enumerate(self.nodes):
            s = str(n)
            parts.append(f"root:{s}" if i == self.root else s)
        return "(" + " ".join(parts) + ")"


def parse_convolution(text: str) -> Convolution:
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    tokens = re.findall(r"root:|\(|\)|[^\s()]+", text)
    pos = 0

    def parse_tree() -> Convolution:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != "(":
            raise ConvolutionError("expected '(' to open a tree")
        pos += 1
        nodes: list[Node] = []
        root = None
        while True:
            if pos >= len(tokens):
                raise ConvolutionError("unbalanced parentheses in convolution")
            tok = tokens[pos]
            if tok == ")":
                pos += 1
                break
            marked = False
            if tok == "root:":
                if root is not None:
                    raise ConvolutionError("a tree may have only one root: marker")
                marked = True
                pos += 1
                if pos >= len(tokens):
                    raise ConvolutionError("dangling root: marker")
                tok = tokens[pos]
            if tok == "(":
                node: Node = parse_tree()
            else:
                node = tok
                pos += 1
            if marked:
                root = len(nodes)
            nodes.append(node)
        if not nodes:
            raise ConvolutionError("empty tree in convolution")
        return Convolution(nodes, root)

    conv = parse_tree()
    if pos != len(tokens):
        raise ConvolutionError("trailing tokens after convolution")
    _name_nested(conv)
    return conv


def _name_nested(conv: Convolution, prefix: str = "conv") -> None:
    counter = [0]

    def walk(c: Convolution) -> None:
        for n in c.nested():
            walk(n)
            counter[0] += 1
            n.name = f"{prefix}{counter[0]}"

    walk(conv)
    if not conv.name:
        conv.name = "top"


def load_convolution(path: str | Path) -> Convolution:
    return parse_convolution(Path(path).read_text(encoding="utf-8"))


def conv_vars(q: Query, c: Convolution) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for alias in c.aliases():
        for v in q[alias].vars:
            seen.setdefault(v)
    return tuple(seen)


def _ensure_names(c: Convolution) -> None:
    if any(not n.name for n in c.nested()) or not c.name:
        _name_nested(c)


def level_atoms(q: Query, c: Convolution) -> list[Atom]:
    """Nodes of one tree as atoms; nested nodes become fresh atoms over all their variables."""
    _ensure_names(c)
    out = []
    for n in c.nodes:
        if isinstance(n, Convolution):
            out.append(Atom(n.name, n.name, conv_vars(q, n)))
        else:
            out.append(q[n])
    return out


def validate_convolution(q: Query, c: Convolution) -> bool:
    """Every atom appears exactly once and every tree admits a join tree."""
    try:
        aliases = c.aliases()
    except AttributeError:
        return False
    if sorted(aliases) != sorted(a.alias for a in q.atoms):
        return False
    try:
        return _trees_ok(q, c)
    except QueryError:
        return False


def _trees_ok(q: Query, c: Convolution) -> bool:
    atoms = level_atoms(q, c)
    res = gyo_reduce(Query(tuple(atoms)))
    if not res.acyclic or not is_join_tree(atoms, res.forest.parent_of):
        return False
    return all(_trees_ok(q, n) for n in c.nested())


def is_rooted(c: Convolution) -> bool:
    """Nested convolutions may only sit at the (marked) root of their tree."""
    nested = [i for i, n in enumerate(c.nodes) if isinstance(n, Convolution)]
    if len(nested) > 1:
        return False
    if nested and c.root != nested[0]:
        return False
    return all(is_rooted(n) for n in c.nested())


def tree_order(q: Query, c: Convolution) -> list[Atom]:
    """A reverse GYO order of one tree, starting at its root node.

    The listed order (root moved to the front) is kept when it already is a
    reverse GYO order; otherwise a join tree is built and walked breadth
    first from the root, children in listed order.
    """
    atoms = level_atoms(q, c)
    root = c.root
    listed = atoms if root is None else [atoms[root]] + atoms[:root] + atoms[root + 1:]
    sub = Query(tuple(atoms))
    if is_gyo_order(sub, list(reversed(listed))):
        return listed
    res = gyo_reduce(sub)
    if not res.acyclic:
        raise ConvolutionError(f"tree {c} is not acyclic")
    start = atoms[root].alias if root is not None else res.forest.roots[0]
    adj: dict[str, list[str]] = {a.alias: [] for a in atoms}
    for child, parent in res.forest.edges():
        adj[child].append(parent)
        adj[parent].append(child)
    rank = {a.alias: i for i, a in enumerate(atoms)}
    by_alias = {a.alias: a for a in atoms}
    order, seen, frontier = [], {start}, [start]
    while frontier:
        nxt = []
        for a in frontier:
            order.append(by_alias[a])
            for b in sorted(adj[a], key=rank.__getitem__):
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return order


def plan_from_rooted(q: Query, c: Convolution) -> Plan:
    """Inside-out plan for a rooted convolution.

    A step whose tree parent is the nested node backjumps to the last step
    of the inner segment, flagged ``cyclic_parent`` so nothing is deleted.
    """
    if not validate_convolution(q, c):
        raise ConvolutionError("not a valid tree convolution of the query")
    if not is_rooted(c):
        raise ConvolutionError(
            "convolution is not rooted; execute it stage-wise with convolution_stages()"
        )
    steps: list[PlanStep] = []
    segments: list[tuple[int, int]] = []

    def build(conv: Convolution) -> None:
        inner = conv.nested()
        if inner:
            build(inner[0])
        order = tree_order(q, conv)
        virtual = inner[0].name if inner else None
        start = len(steps) + 1
        for k, node in enumerate(order):
            if node.alias == virtual:
                continue
            prefix_atoms = [s.atom for s in steps]
            keys = prefix_keys(prefix_atoms, node)
            parent = find_parent(order[: k + 1], node) if k > 0 else None
            cyclic = False
            if parent is None:
                parent_pos = None
            elif parent.alias == virtual:
                parent_pos = start - 1
                cyclic = True
            else:
                parent_pos = next(i for i, s in enumerate(steps, 1) if s.atom.alias == parent.alias)
            steps.append(PlanStep(node, keys, parent_pos, cyclic))
        segments.append((start, len(steps)))

    build(c)
    if sorted(s.atom.alias for s in steps) != sorted(a.alias for a in q.atoms):
        raise PlanError("convolution plan does not cover the query")
    return Plan(q, steps, segments)


def convolution_stages(q: Query, c: Convolution) -> list[Stage]:
    """Materialize nested trees innermost first; the last stage yields the result."""
    if not validate_convolution(q, c):
        raise ConvolutionError("not a valid tree convolution of the query")
    stages: list[Stage] = []

    def build(conv: Convolution, final: bool) -> None:
        for n in conv.nested():
            build(n, False)
        order = tree_order(q, conv)
        stages.append(Stage(Query(tuple(order)), [a.alias for a in order], None if final else conv.name))

    build(c, True)
    return stages
