import itertools

import pytest
from hypothesis import given, strategies as st

from treetracker.catalog import (
    Bucket,
    ContractViolation,
    Database,
    LoadError,
    Relation,
    Schema,
    SchemaError,
    Tuple,
    build_index,
    concat,
    load_csv,
    parse_value,
    project,
)


def test_parse_value_ints_and_strings():
    assert parse_value("42") == 42
    assert parse_value("-7") == -7
    assert parse_value("007") == 7
    assert parse_value("4.2") == "4.2"
    assert parse_value("abc") == "abc"
    assert parse_value(str(2**63)) == str(2**63)  # outside int64 stays text


def test_schema_rejects_duplicates():
    with pytest.raises(SchemaError):
        Schema(("a", "b", "a"))


def test_relation_arity_checked():
    with pytest.raises(SchemaError):
        Relation("R", Schema(("a", "b")), (Tuple(0, (1,)),))


def test_from_rows_dedup_and_row_ids():
    r = Relation.from_rows("R", ("a", "b"), [(1, 2), (1, 2), (3, 4)])
    assert [t.row_id for t in r.tuples] == [0, 1, 2]
    d = Relation.from_rows("R", ("a", "b"), [(1, 2), (1, 2), (3, 4)], dedup=True)
    assert d.rows() == [(1, 2), (3, 4)]


def test_load_csv_roundtrip(tmp_path):
    r = Relation.from_rows("R", ("a", "b"), [(1, "x"), (2, "y")])
    r.to_csv(tmp_path / "R.csv")
    back = load_csv(tmp_path / "R.csv", "R")
    assert back.schema.attrs == ("a", "b")
    assert back.rows() == [(1, "x"), (2, "y")]


def test_load_csv_reports_line(tmp_path):
    p = tmp_path / "R.csv"
    p.write_text("a,b\n1,2\n3\n")
    with pytest.raises(LoadError, match=r"R\.csv:3"):
        load_csv(p, "R")


def test_load_csv_empty_file(tmp_path):
    p = tmp_path / "R.csv"
    p.write_text("")
    with pytest.raises(LoadError):
        load_csv(p, "R")


def test_database_dir_roundtrip(tmp_path):
    db = Database()
    db.add(Relation.from_rows("R", ("a",), [(1,), (2,)]))
    db.add(Relation.from_rows("S", ("a", "b"), [(1, 5)]))
    db.to_dir(tmp_path)
    back = Database.from_dir(tmp_path)
    assert sorted(back) == ["R", "S"]
    assert back.input_size == 3
    with pytest.raises(LoadError):
        Database.from_dir(tmp_path / "missing")


def test_project_and_concat():
    s = Schema(("a", "b", "c"))
    assert project((1, 2, 3), s, ("c", "a")) == (3, 1)
    schema, vals = concat((Schema(("a", "b")), (1, 2)), (Schema(("b", "c")), (2, 9)))
    assert schema.attrs == ("a", "b", "c") and vals == (1, 2, 9)
    with pytest.raises(ContractViolation):
        concat((Schema(("a", "b")), (1, 2)), (Schema(("b",)), (3,)))


def test_index_probe_and_miss():
    r = Relation.from_rows("R", ("a", "b"), [(1, 1), (1, 2), (2, 3)])
    idx = build_index(r, ("a",))
    assert [t.values for t in idx.probe((1,))] == [(1, 1), (1, 2)]
    assert idx.probe((9,)) is None
    with pytest.raises(ContractViolation):
        idx.probe((1, 2))


def test_empty_key_index_holds_everything():
    r = Relation.from_rows("R", ("a",), [(1,), (2,)])
    idx = build_index(r, ())
    assert len(idx.probe(())) == 2


def test_emptied_bucket_is_a_miss():
    r = Relation.from_rows("R", ("a", "b"), [(1, 1), (1, 2)])
    idx = build_index(r, ("a",))
    for t in r.tuples:
        idx.delete_tuple((1,), t)
    assert idx.probe((1,)) is None
    assert idx.deleted_count == 2 and idx.live_count() == 0


def test_double_delete_rejected():
    r = Relation.from_rows("R", ("a",), [(1,)])
    idx = build_index(r, ("a",))
    idx.delete_tuple((1,), r.tuples[0])
    with pytest.raises(ContractViolation):
        idx.delete_tuple((1,), r.tuples[0])


def _iterate_with_deletions(n, schedule):
    """Walk a bucket of n rows; at visit k delete the slots in schedule[k]."""
    b = Bucket()
    for i in range(n):
        b.append(Tuple(i, (i,)))
    visited = []
    deleted = set()
    for slot in range(len(b.rows)):
        if not b.alive[slot]:
            continue
        visited.append(slot)
        for d in schedule.get(len(visited) - 1, ()):
            if b.alive[d]:
                b.alive[d] = 0
                b.live -= 1
                deleted.add(d)
    return visited, deleted, b


def test_mid_iteration_deletion_all_interleavings():
    # every way of deleting one slot at every visit of a 4-row bucket
    n = 4
    for choice in itertools.product(range(-1, n), repeat=n):
        schedule = {k: (c,) for k, c in enumerate(choice) if c >= 0}
        visited, deleted, b = _iterate_with_deletions(n, schedule)
        # visited slots are increasing and never include a slot deleted before its turn
        assert visited == sorted(visited)
        for pos, slot in enumerate(visited):
            earlier = {c for k, c in enumerate(choice[:pos]) if c >= 0}
            assert slot not in earlier
        # each live slot was either visited or deleted before its turn
        assert set(range(n)) <= set(visited) | deleted
        assert b.live == n - len(deleted)
        assert [t.row_id for t in b] == [s for s in range(n) if s not in deleted]


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=20))
def test_index_partitions_relation(rows):
    r = Relation.from_rows("R", ("a", "b"), rows)
    idx = build_index(r, ("a",))
    assert idx.live_count() == len(r)
    for key, bucket in idx.buckets.items():
        assert all(t.values[0] == key[0] for t in bucket)
