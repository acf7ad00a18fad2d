"""Flatten a :class:`Plan` into the per-step arrays the kernels iterate over."""
from __future__ import annotations

from dataclasses import dataclass, field
from operator import itemgetter
from typing import Callable, Mapping

from ..catalog import HashIndex, Relation, build_index


class ExecutionError(Exception):
    pass


def _keyfunc(slots: tuple[int, ...]) -> Callable[[list], tuple]:
    if not slots:
        return lambda b: ()
    if len(slots) == 1:
        s = slots[0]
        return lambda b: (b[s],)
    return itemgetter(*slots)


@dataclass
class CompiledPlan:
    """Steps are 0-based here; ``parents[i] == -1`` means no backjump target."""

    n: int
    n_slots: int
    variables: tuple[str, ...]
    indexes: list[HashIndex]
    buckets: list[dict]
    key_slots: list[tuple[int, ...]]
    keyfuncs: list[Callable]
    assign: list[tuple[tuple[int, int], ...]]
    parents: list[int]
    cyclic: list[bool]
    # (child step, root-tuple columns of the child's key) for non-cyclic children of step 0
    root_children: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    build_scans: int = 0
    input_count: int = 0


def compile_for_execution(plan, relations: Mapping[str, Relation]) -> CompiledPlan:
    """Build fresh indexes for every step, including the degenerate root index.

    ``relations`` maps atom alias to the relation bound to it.
    """
    variables = plan.variables
    slot = {v: i for i, v in enumerate(variables)}
    indexes, buckets, key_slots, keyfuncs, assign, parents, cyclic = [], [], [], [], [], [], []
    build_scans = 0
    input_count = 0
    bound: set[str] = set()
    for step in plan.steps:
        a = step.atom
        try:
            rel = relations[a.alias]
        except KeyError:
            raise ExecutionError(f"no relation bound to atom {a.alias} ({a.relation})") from None
        if len(rel.schema) != len(a.vars):
            raise ExecutionError(
                f"atom {a} has arity {len(a.vars)} but relation {rel.name!r} has {len(rel.schema)}"
            )
        key_cols = [a.vars.index(v) for v in step.keys]
        idx = build_index(rel, [rel.schema.attrs[c] for c in key_cols])
        build_scans += len(rel)
        input_count += len(rel)
        indexes.append(idx)
        buckets.append(idx.buckets)
        ks = tuple(slot[v] for v in step.keys)
        key_slots.append(ks)
        keyfuncs.append(_keyfunc(ks))
        assign.append(tuple((j, slot[v]) for j, v in enumerate(a.vars) if v not in bound))
        bound.update(a.vars)
        parents.append(step.parent_pos - 1 if step.parent_pos is not None else -1)
        cyclic.append(bool(step.cyclic_parent))
    root_children = []
    if plan.steps:
        root = plan.steps[0].atom
        for i, step in enumerate(plan.steps):
            if i > 0 and parents[i] == 0 and not cyclic[i]:
                root_children.append((i, tuple(root.vars.index(v) for v in step.keys)))
    return CompiledPlan(
        n=len(plan.steps),
        n_slots=len(variables),
        variables=variables,
        indexes=indexes,
        buckets=buckets,
        key_slots=key_slots,
        keyfuncs=keyfuncs,
        assign=assign,
        parents=parents,
        cyclic=cyclic,
        root_children=root_children,
        build_scans=build_scans,
        input_count=input_count,
    )
