import filecmp

import pytest

from treetracker.catalog import Database, Relation
from treetracker.engine import oracle_join, run_ttj
from treetracker.planner import compile_plan, validate_reverse_gyo
from treetracker.query import parse_query
from treetracker.workloads import (
    WorkloadSpec,
    gen_box,
    gen_example1,
    gen_random_acyclic,
    gen_star,
    generate,
)


def test_example1_sizes():
    w = gen_example1(1)
    assert all(len(r) == 1 for r in w.db.values())
    assert oracle_join(w.query, w.db) == []
    w = gen_example1(3)
    assert [len(w.db[n]) for n in "RSTU"] == [3, 3, 3, 3]
    st = run_ttj(compile_plan(gen_example1(2).query, ["R", "S", "T", "U"]), gen_example1(2).db)
    assert st.probes == 7


def test_box_singleton_domain():
    w = gen_box(1)
    assert oracle_join(w.query, w.db) == [(1, 1, 1, 1, 1)]
    broken = Database(w.db)
    broken.add(Relation.from_rows("S1", ("x1", "y"), [(1, 0)]))
    assert oracle_join(w.query, broken) == []


def test_box_nonempty_relations():
    w = gen_box(5, seed=42)
    assert all(len(r) > 0 for r in w.db.values())
    assert w.conv is not None


def test_random_acyclic_without_dangling_needs_no_deletions():
    for seed in range(60):
        w = gen_random_acyclic(WorkloadSpec("random_acyclic", 8, seed, 0.0))
        assert validate_reverse_gyo(w.query, w.order)
        assert all(len(r) <= 8 for r in w.db.values())
        assert len(w.query) <= 6
        st = run_ttj(compile_plan(w.query, w.order), w.db)
        assert st.deletions == 0 and st.backjumps == 0


def test_random_acyclic_all_dangling_is_empty():
    for seed in range(30):
        w = gen_random_acyclic(WorkloadSpec("random_acyclic", 8, seed, 1.0))
        if len(w.query) > 1:
            assert oracle_join(w.query, w.db) == []


def test_star_shape():
    w = gen_star(100, seed=3, dangling_fraction=0.5)
    assert len(w.db["F"]) == 100
    assert all(len(w.db[f"D{d}"]) < 25 for d in (1, 2, 3))
    assert validate_reverse_gyo(w.query, w.order)


def test_workload_spec_validation():
    with pytest.raises(ValueError):
        WorkloadSpec("nope", 3)
    with pytest.raises(ValueError):
        WorkloadSpec("box", 0)
    with pytest.raises(ValueError):
        WorkloadSpec("star", 3, dangling_fraction=1.5)


@pytest.mark.parametrize("family", ["example1", "box", "random_acyclic", "star"])
def test_deterministic_write(tmp_path, family):
    spec = WorkloadSpec(family, 12, seed=9, dangling_fraction=0.3)
    generate(spec).write(tmp_path / "a")
    generate(spec).write(tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert not mismatch and not errors
    q = parse_query((tmp_path / "a" / "query.txt").read_text())
    db = Database.from_dir(tmp_path / "a")
    assert all(a.relation in db for a in q.atoms)
