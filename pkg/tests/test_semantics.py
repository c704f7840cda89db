import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import data_trees, node_exprs
from xpd.ast import Diamond, Down, Eps, EqDiamond, NeqDiamond, Union, parse_node, parse_path
from xpd.semantics import (
    DataTree, Evaluator, TreeSyntaxError, eval_node, eval_path, node_set, pair_set, parse_tree,
    print_tree, restrict,
)

AB = ["a", "b"]
EXAMPLE = "(a 0 (a 0 (b 1)) (b 1))"


@pytest.fixture
def example():
    return parse_tree(EXAMPLE, AB)


@pytest.mark.parametrize("text, expected", [
    ("<down = down[a]/down[b]>", True),
    ("<eps = down/down>", False),
    ("!<down/down != down/down>", True),
    ("<down[a]/down[b] = eps>", False),
    ("<down[a & <down[b]>] = eps>", True),
])
def test_example_tree(example, text, expected):
    assert eval_node(example, example.root, parse_node(text, AB)) is expected


def test_tree_round_trip(example):
    assert parse_tree(print_tree(example), AB) == example
    assert len(example) == 4
    assert example.depth(example.node_at([0, 0])) == 2


@pytest.mark.parametrize("text", ["(a 0", "(a x)", "(c 0)", "a 0", "(a 0) (b 1)"])
def test_bad_trees(text):
    with pytest.raises(TreeSyntaxError):
        parse_tree(text, AB)


def test_restrict_root_is_identity(example):
    assert restrict(example, example.root) == example


def test_restrict_keeps_class_ids(example):
    sub = restrict(example, example.node_at([0]))
    assert sorted(sub.data(x) for x in sub.nodes) == [0, 1]


def test_unknown_node(example):
    with pytest.raises(KeyError):
        restrict(example, 99)


def test_path_pairs(example):
    down = pair_set(example, parse_path("down", AB))
    assert len(down) == 3
    assert eval_path(example, example.root, example.node_at([1]), parse_path("down/[b]", AB))
    assert node_set(example, parse_node("b", AB)) == {example.node_at([0, 0]), example.node_at([1])}


@given(data_trees(), node_exprs(), st.data())
def test_locality(t, phi, data):
    x = data.draw(st.sampled_from(t.nodes))
    sub = restrict(t, x)
    assert eval_node(t, x, phi) == eval_node(sub, x, phi)


@given(data_trees(), st.data())
def test_locality_paths(t, data):
    x = data.draw(st.sampled_from(t.nodes))
    sub = restrict(t, x)
    a = parse_path(data.draw(st.sampled_from(["down", "down/down[a]", "eps + down/[<down != eps>]"])), AB)
    full, part = Evaluator(t), Evaluator(sub)
    for y in sub.nodes:
        for z in sub.nodes:
            assert full.related(y, z, a) == part.related(y, z, a)


PATHS = st.sampled_from([parse_path(s, AB) for s in
                         ["eps", "down", "down/[a]", "down/down", "[b]/down", "down + eps", "down/[<down = eps>]"]])


@given(data_trees(), PATHS)
def test_diamond_equals_reflexive_equality(t, a):
    assert node_set(t, Diamond(a)) == node_set(t, EqDiamond(a, a))


@given(data_trees(), PATHS, PATHS)
def test_symmetry(t, a, b):
    assert node_set(t, EqDiamond(a, b)) == node_set(t, EqDiamond(b, a))
    assert node_set(t, NeqDiamond(a, b)) == node_set(t, NeqDiamond(b, a))


@given(data_trees(), PATHS, PATHS)
def test_union_denotation(t, a, b):
    assert pair_set(t, Union(a, b)) == pair_set(t, a) | pair_set(t, b)


@given(data_trees())
def test_eps_and_down(t):
    assert pair_set(t, Eps()) == {(x, x) for x in t.nodes}
    assert pair_set(t, Down()) == {(t.parent(y), y) for y in t.nodes if t.parent(y) is not None}


def test_from_nested():
    t = DataTree.from_nested(("a", 0, [("b", 1), ("b", 0)]))
    assert print_tree(t) == "(a 0 (b 1) (b 0))"
