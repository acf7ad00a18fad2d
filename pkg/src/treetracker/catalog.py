"""Relations, tuples, and deletable hash indexes.

Every executor reads from immutable :class:`Relation` objects and builds its
own :class:`HashIndex` per run, since TTJ deletes from the index buckets while
it executes.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

Value = Union[int, str]

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

_INT_RE = re.compile(r"[+-]?\d+\Z")


class CatalogError(Exception):
    """Base class for data-loading and contract errors in the catalog."""


class SchemaError(CatalogError):
    pass


class LoadError(CatalogError):
    pass


class ContractViolation(CatalogError):
    """Raised when a caller breaks an operation's precondition."""


def parse_value(field_text: str) -> Value:
    """Integers when the whole field is a decimal literal, else the raw string."""
    if _INT_RE.match(field_text):
        v = int(field_text)
        if INT64_MIN <= v <= INT64_MAX:
            return v
    return field_text


@dataclass(frozen=True)
class Schema:
    attrs: tuple[str, ...]

    def __post_init__(self) -> None:
        attrs = tuple(self.attrs)
        object.__setattr__(self, "attrs", attrs)
        if len(set(attrs)) != len(attrs):
            dup = sorted({a for a in attrs if attrs.count(a) > 1})
            raise SchemaError(f"duplicate attribute(s) in schema: {', '.join(dup)}")

    def __len__(self) -> int:
        return len(self.attrs)

    def __iter__(self) -> Iterator[str]:
        return iter(self.attrs)

    def __contains__(self, attr: object) -> bool:
        return attr in self.attrs

    def index(self, attr: str) -> int:
        try:
            return self.attrs.index(attr)
        except ValueError:
            raise ContractViolation(f"attribute {attr!r} not in schema {self.attrs}") from None

    def positions(self, attrs: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.index(a) for a in attrs)


@dataclass(frozen=True)
class Tuple:
    row_id: int
    values: tuple[Value, ...]


@dataclass(frozen=True)
class Relation:
    """An immutable named relation. ``row_id`` values are unique within it."""

    name: str
    schema: Schema
    tuples: tuple[Tuple, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.schema, Schema):
            object.__setattr__(self, "schema", Schema(tuple(self.schema)))
        object.__setattr__(self, "tuples", tuple(self.tuples))
        arity = len(self.schema)
        seen: set[int] = set()
        for t in self.tuples:
            if len(t.values) != arity:
                raise SchemaError(
                    f"tuple {t.values!r} has arity {len(t.values)}, "
                    f"relation {self.name!r} expects {arity}"
                )
            if t.row_id in seen:
                raise SchemaError(f"duplicate row_id {t.row_id} in relation {self.name!r}")
            seen.add(t.row_id)

    @classmethod
    def from_rows(
        cls,
        name: str,
        attrs: Sequence[str],
        rows: Iterable[Sequence[Value]],
        dedup: bool = False,
    ) -> "Relation":
        """Build a relation, numbering rows 0..n-1 in input order."""
        out: list[Tuple] = []
        seen: set[tuple] = set()
        for row in rows:
            values = tuple(row)
            if dedup:
                if values in seen:
                    continue
                seen.add(values)
            out.append(Tuple(len(out), values))
        return cls(name, Schema(tuple(attrs)), tuple(out))

    def __len__(self) -> int:
        return len(self.tuples)

    def rows(self) -> list[tuple[Value, ...]]:
        return [t.values for t in self.tuples]

    def renamed(self, name: str, attrs: Sequence[str] | None = None) -> "Relation":
        return Relation(name, Schema(tuple(attrs)) if attrs is not None else self.schema, self.tuples)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.schema.attrs)
            for t in self.tuples:
                w.writerow(t.values)


def load_csv(path: str | Path, name: str, dedup: bool = False) -> Relation:
    """Read a header-first CSV file into a relation.

    Row ids follow file order. With ``dedup`` set, repeated value lists are
    dropped and the first occurrence is kept.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: empty file, expected a header row") from None
        schema = Schema(tuple(h.strip() for h in header))
        rows: list[tuple[Value, ...]] = []
        for line_no, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(schema):
                raise LoadError(
                    f"{path}:{line_no}: expected {len(schema)} fields, got {len(raw)}"
                )
            rows.append(tuple(parse_value(f) for f in raw))
    return Relation.from_rows(name, schema.attrs, rows, dedup=dedup)


def project(t: Tuple | Sequence[Value], schema: Schema, attrs: Sequence[str]) -> tuple[Value, ...]:
    values = t.values if isinstance(t, Tuple) else tuple(t)
    return tuple(values[schema.index(a)] for a in attrs)


def concat(
    left: tuple[Schema, Sequence[Value]], right: tuple[Schema, Sequence[Value]]
) -> tuple[Schema, tuple[Value, ...]]:
    """Join two schema-tagged value lists; shared attributes appear once."""
    lschema, lvals = left
    rschema, rvals = right
    attrs = list(lschema.attrs)
    values = list(lvals)
    for a, v in zip(rschema.attrs, rvals):
        if a in lschema:
            if lvals[lschema.index(a)] != v:
                raise ContractViolation(
                    f"cannot concatenate: attribute {a!r} is {lvals[lschema.index(a)]!r} "
                    f"on the left and {v!r} on the right"
                )
        else:
            attrs.append(a)
            values.append(v)
    return Schema(tuple(attrs)), tuple(values)


class Bucket:
    """Ordered hash bucket with tombstone deletion.

    ``rows`` never shrinks, so a loop over slot numbers taken before a
    deletion stays valid; dead slots are skipped through ``alive``.
    """

    __slots__ = ("rows", "alive", "live")

    def __init__(self) -> None:
        self.rows: list[Tuple] = []
        self.alive: bytearray = bytearray()
        self.live = 0

    def append(self, t: Tuple) -> None:
        self.rows.append(t)
        self.alive.append(1)
        self.live += 1

    def __len__(self) -> int:
        return self.live

    def __iter__(self) -> Iterator[Tuple]:
        rows, alive = self.rows, self.alive
        for slot in range(len(rows)):
            if alive[slot]:
                yield rows[slot]

    def slot_of(self, t: Tuple) -> int:
        for slot, r in enumerate(self.rows):
            if r.row_id == t.row_id and self.alive[slot]:
                return slot
        raise ContractViolation(f"tuple row_id={t.row_id} is not present in this bucket")


@dataclass
class HashIndex:
    source: str
    key_attrs: tuple[str, ...]
    buckets: dict[tuple, Bucket] = field(default_factory=dict)
    deleted_count: int = 0
    size: int = 0

    def probe(self, key: Sequence[Value]) -> Bucket | None:
        """Return the live bucket for ``key``, or None on a miss.

        Emptied buckets are reported as misses, the same as absent keys.
        """
        key = tuple(key)
        if len(key) != len(self.key_attrs):
            raise ContractViolation(
                f"probe key {key!r} has arity {len(key)}, index keyed on {self.key_attrs}"
            )
        b = self.buckets.get(key)
        if b is None or b.live == 0:
            return None
        return b

    def delete_tuple(self, key: Sequence[Value], t: Tuple) -> None:
        b = self.buckets.get(tuple(key))
        if b is None:
            raise ContractViolation(f"no bucket under key {tuple(key)!r}")
        self.delete_slot(b, b.slot_of(t))

    def delete_slot(self, bucket: Bucket, slot: int) -> None:
        if not bucket.alive[slot]:
            raise ContractViolation("slot already deleted")
        bucket.alive[slot] = 0
        bucket.live -= 1
        self.deleted_count += 1

    def live_count(self) -> int:
        return sum(b.live for b in self.buckets.values())


def build_index(rel: Relation, key_attrs: Sequence[str]) -> HashIndex:
    """Hash ``rel`` on ``key_attrs``; an empty key puts everything under ``()``."""
    key_attrs = tuple(key_attrs)
    cols = rel.schema.positions(key_attrs)
    idx = HashIndex(rel.name, key_attrs)
    buckets = idx.buckets
    for t in rel.tuples:
        k = tuple(t.values[c] for c in cols)
        b = buckets.get(k)
        if b is None:
            b = buckets[k] = Bucket()
        b.append(t)
    idx.size = len(rel.tuples)
    return idx


class Database(dict):
    """Mapping of relation name to :class:`Relation`."""

    def add(self, rel: Relation) -> Relation:
        self[rel.name] = rel
        return rel

    def relation(self, name: str) -> Relation:
        try:
            return self[name]
        except KeyError:
            raise CatalogError(f"relation {name!r} is not in the database") from None

    @classmethod
    def from_dir(cls, path: str | Path, dedup: bool = False) -> "Database":
        path = Path(path)
        if not path.is_dir():
            raise LoadError(f"{path}: not a directory")
        db = cls()
        for f in sorted(path.glob("*.csv")):
            db.add(load_csv(f, f.stem, dedup=dedup))
        return db

    def to_dir(self, path: str | Path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        for name in sorted(self):
            self[name].to_csv(path / f"{name}.csv")

    @property
    def input_size(self) -> int:
        return sum(len(r) for r in self.values())
