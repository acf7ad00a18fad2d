import pytest

from treetracker.planner import (
    PlanError,
    compile_plan,
    count_right_subtrees,
    decompose_bushy,
    default_order,
    format_bushy,
    parse_bushy,
    parse_plan,
    plan_tree,
    validate_reverse_gyo,
)
from treetracker.query import Query, QueryError

Q1 = Query.of("R(i,x)", "S(x,y,j)", "T(y,k)", "U(y,l)")
ABCD = Query.of("A(a,b)", "B(b,c)", "C(c,d)", "D(d,e)")


def _parents(plan):
    return {k: v for k, v in plan_tree(plan).items() if v is not None}


def test_compile_q1():
    p = compile_plan(Q1, ["R", "S", "T", "U"])
    assert [s.keys for s in p.steps] == [(), ("x",), ("y",), ("y",)]
    assert _parents(p) == {"S": "R", "T": "S", "U": "S"}
    assert p.variables == ("i", "x", "y", "j", "k", "l")


def test_compile_prefix_keys():
    p = compile_plan(Q1, ["S", "R", "T", "U"])
    assert p.step(2).keys == ("x",)
    assert _parents(p)["R"] == "S"


def test_single_atom_plan():
    q = Query.of("R(a)")
    p = compile_plan(q, ["R"])
    assert len(p) == 1 and p.step(1).keys == () and p.step(1).parent_pos is None


def test_not_a_permutation():
    with pytest.raises(PlanError):
        compile_plan(Q1, ["R", "S", "T"])
    with pytest.raises(PlanError):
        compile_plan(Q1, ["R", "S", "T", "T"])
    with pytest.raises(PlanError):
        compile_plan(Q1, ["R", "S", "T", "Z"])


def test_validate_reverse_gyo():
    assert validate_reverse_gyo(Q1, ["R", "S", "T", "U"])
    assert not validate_reverse_gyo(Q1, ["T", "U", "R", "S"])
    assert validate_reverse_gyo(Query.of("R(a)"), ["R"])


def test_default_order_keeps_valid_listing():
    assert [a.alias for a in default_order(Q1)] == ["R", "S", "T", "U"]
    q = Q1.reordered(["T", "U", "R", "S"])
    order = default_order(q)
    assert validate_reverse_gyo(q, order)
    with pytest.raises(QueryError):
        default_order(Query.of("R(a,b)", "S(b,c)", "T(c,a)"))


def test_bushy_two_pairs():
    stages = decompose_bushy(ABCD, parse_bushy("((A B) (C D))"))
    assert [(s.order, s.output) for s in stages] == [(["C", "D"], "M1"), (["A", "B", "M1"], None)]
    assert stages[1].query["M1"].vars == ("c", "d", "e")


def test_bushy_left_deep_is_one_stage():
    stages = decompose_bushy(ABCD, parse_bushy("(((A B) C) D)"))
    assert [(s.order, s.output) for s in stages] == [(["A", "B", "C", "D"], None)]
    assert decompose_bushy(ABCD, parse_bushy("(A B C D)"))[0].order == ["A", "B", "C", "D"]


def test_bushy_right_deep():
    stages = decompose_bushy(ABCD, parse_bushy("(A (B (C D)))"))
    assert [(s.order, s.output) for s in stages] == [
        (["C", "D"], "M1"), (["B", "M1"], "M2"), (["A", "M2"], None)
    ]


def test_bushy_stage_count_matches_right_subtrees():
    for text in ["((A B) (C D))", "(A (B (C D)))", "((A (B C)) D)", "(((A B) C) D)"]:
        bp = parse_bushy(text)
        assert len(decompose_bushy(ABCD, bp)) == count_right_subtrees(bp) + 1
        assert parse_bushy(format_bushy(bp)) == bp


def test_bushy_errors():
    with pytest.raises(PlanError):
        parse_bushy("((A B)")
    with pytest.raises(PlanError):
        parse_bushy("(A B))")
    with pytest.raises(PlanError):
        parse_bushy("()")
    with pytest.raises(PlanError):
        decompose_bushy(ABCD, parse_bushy("(A B C)"))


def test_parse_plan_comments():
    assert parse_plan("R\nS # root child\n\nT U\n") == ["R", "S", "T", "U"]


def test_describe_mentions_every_step():
    text = compile_plan(Q1, ["R", "S", "T", "U"]).describe()
    assert text.count("\n") == 3 and "keys={x}" in text
