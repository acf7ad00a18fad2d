import pytest

from treetracker.convolution import (
    ConvolutionError,
    convolution_stages,
    is_rooted,
    parse_convolution,
    plan_from_rooted,
    tree_order,
    validate_convolution,
)
from treetracker.query import Query
from treetracker.workloads import BOX_CONVOLUTION, box_query

QBOX = box_query()
Q1 = Query.of("R(i,x)", "S(x,y,j)", "T(y,k)", "U(y,l)")
NON_ROOTED = "((R1 R2 S2) (R3 R4 S4) (S1 S3))"
BINARY = "(root:(root:(root:(root:(root:(root:(S1 S2) S3) S4) R1) R2) R3) R4)"


def test_parse_roundtrip():
    c = parse_convolution(BOX_CONVOLUTION)
    assert str(c) == BOX_CONVOLUTION
    assert c.root == 0 and c.nested()[0].name == "conv1"
    assert c.depth() == 2
    assert sorted(c.aliases()) == sorted(a.alias for a in QBOX.atoms)


@pytest.mark.parametrize("text", ["(A B", "A B)", "()", "(root: )", "(root:A root:B)", "(A) B"])
def test_parse_errors(text):
    with pytest.raises(ConvolutionError):
        parse_convolution(text)


def test_validate():
    assert validate_convolution(QBOX, parse_convolution(BOX_CONVOLUTION))
    assert not validate_convolution(QBOX, parse_convolution("(root:(S1 S2 S3 S4) R1 R2 R3)"))
    assert validate_convolution(QBOX, parse_convolution(BINARY))
    assert validate_convolution(QBOX, parse_convolution(NON_ROOTED))
    # a flat tree over a cyclic query is not a join tree
    assert not validate_convolution(QBOX, parse_convolution("(S1 S2 S3 S4 R1 R2 R3 R4)"))


def test_rooted():
    assert is_rooted(parse_convolution(BOX_CONVOLUTION))
    assert not is_rooted(parse_convolution(NON_ROOTED))
    assert is_rooted(parse_convolution("(R S T U)"))
    # a nested node that is not marked as root
    assert not is_rooted(parse_convolution("((S1 S2 S3 S4) R1 R2 R3 R4)"))


def test_box_plan():
    plan = plan_from_rooted(QBOX, parse_convolution(BOX_CONVOLUTION))
    assert plan.aliases == ["S1", "S2", "S3", "S4", "R1", "R2", "R3", "R4"]
    for pos in range(5, 9):
        step = plan.step(pos)
        assert step.parent_pos == 4 and step.cyclic_parent
    assert not any(plan.step(p).cyclic_parent for p in range(1, 5))
    assert plan.segments == [(1, 4), (5, 8)]


def test_single_tree_is_reverse_gyo_plan():
    plan = plan_from_rooted(Q1, parse_convolution("(R S T U)"))
    assert plan.aliases == ["R", "S", "T", "U"]
    assert not any(s.cyclic_parent for s in plan.steps)


def test_two_level_chain():
    q = Query.of("A(a,b)", "B(b,c)", "C(c,d)")
    plan = plan_from_rooted(q, parse_convolution("(root:(A B) C)"))
    assert plan.aliases == ["A", "B", "C"]
    assert plan.step(3).parent_pos == 2 and plan.step(3).cyclic_parent


def test_tree_order_repairs_listing():
    # listed order is not a reverse GYO order, so a BFS from the root replaces it
    order = tree_order(Q1, parse_convolution("(root:T U R S)"))
    assert [a.alias for a in order][0] == "T"
    q = Query(tuple(order))
    from treetracker.query import is_gyo_order

    assert is_gyo_order(q, list(reversed(order)))


def test_non_rooted_refuses_plan():
    with pytest.raises(ConvolutionError, match="stage"):
        plan_from_rooted(QBOX, parse_convolution(NON_ROOTED))


def test_stages_for_non_rooted():
    stages = convolution_stages(QBOX, parse_convolution(NON_ROOTED))
    assert [s.output for s in stages] == ["conv1", "conv2", "conv3", None]
    assert sorted(stages[-1].order) == ["conv1", "conv2", "conv3"]


def test_invalid_convolution_rejected():
    with pytest.raises(ConvolutionError):
        plan_from_rooted(QBOX, parse_convolution("(root:(S1 S2 S3 S4) R1 R2 R3)"))
    with pytest.raises(ConvolutionError):
        convolution_stages(QBOX, parse_convolution("(S1 S2 S3 S4 R1 R2 R3 R4)"))
