import pytest
from hypothesis import given
from hypothesis import strategies as st

from xpd.ast import parse_node, parse_path
from xpd.decision import equiv_node, equiv_path, sat, valid
from xpd.normal_form import BudgetExceeded, Limits
from xpd.oracle import Bounds, brute_equiv, random_node
from xpd.semantics import Evaluator

AB = ("a", "b")


def n(text, alphabet=AB):
    return parse_node(text, alphabet)


@pytest.mark.parametrize("text, expected", [
    ("a & !a", False),
    ("<eps != eps>", False),
    ("<down = eps> & !<down>", False),
    ("<down != down>", True),
    ("<down[a] = down[b]> & !<down[a] != down[b]>", True),
    ("<down[a]/down[b] = eps>", True),
])
def test_sat(text, expected):
    v = sat(n(text), "full", AB)
    assert v.sat is expected
    if v.sat:
        assert Evaluator(v.model).holds(v.model.root, n(text))
        assert v.model_size == len(v.model)


def test_sat_depth_two_uses_search():
    v = sat(n("<down[a]/down[b] = eps>"), "eq", AB)
    assert v.method == "search" and v.level == 2
    assert v.model_size >= 3


def test_depth_two_miss_raises():
    with pytest.raises(BudgetExceeded):
        sat(n("<down/down> & !<down/down>"), "eq", AB)


def test_level_cap_raises():
    with pytest.raises(BudgetExceeded):
        sat(n("<down/down/down>"), "eq", AB, Limits(level_cap=1), Bounds(3, 2, 2, 2))


@pytest.mark.parametrize("text, expected", [
    ("<down = eps> | !<down = eps>", True),
    ("!<down> | <down>", True),
    ("a", False),
    ("<eps = eps>", True),
    ("!<eps != eps>", True),
])
def test_valid(text, expected):
    assert valid(n(text), "full", AB) is expected


def test_negated_label_over_three_labels():
    abc = ("a", "b", "c")
    v = equiv_node(n("!a", abc), n("(b & <eps=eps>) | (c & <eps=eps>)", abc), "eq", abc)
    assert v.equivalent


def test_differ_has_witness():
    v = equiv_node(n("a"), n("b"), "eq", AB)
    assert not v.equivalent
    ev = Evaluator(v.tree)
    assert ev.holds(v.node, n("a")) != ev.holds(v.node, n("b"))


def test_depth_two_differ_by_search():
    e1, e2 = n("<down[a]/down[b] = eps>"), n("<down[a & <down[b]>] = eps>")
    v = equiv_node(e1, e2, "eq", AB)
    assert not v.equivalent and v.method == "search"
    ev = Evaluator(v.tree)
    assert ev.holds(v.node, e1) != ev.holds(v.node, e2)


@pytest.mark.parametrize("a, b, expected", [
    ("eps/down", "down/eps", True),
    ("down + down", "down", True),
    ("down/[a] + down/[b]", "down", True),
    ("down/[a]", "down", False),
    ("[a]/down", "down/[a]", False),
])
def test_equiv_path(a, b, expected):
    alpha, beta = parse_path(a, AB), parse_path(b, AB)
    v = equiv_path(alpha, beta, "eq", AB)
    assert v.equivalent is expected
    if not expected:
        x, y = v.pair
        ev = Evaluator(v.tree)
        assert ev.related(x, y, alpha) != ev.related(x, y, beta)


@given(st.randoms(use_true_random=False), st.sampled_from(["eq", "full"]))
def test_equiv_matches_exhaustive_comparison(rng, fragment):
    e1 = random_node(rng, AB, fragment, 1, 4)
    e2 = random_node(rng, AB, fragment, 1, 4)
    v = equiv_node(e1, e2, fragment, AB)
    assert v.equivalent == (brute_equiv(e1, e2, AB) is None)
    if not v.equivalent:
        ev = Evaluator(v.tree)
        assert ev.holds(v.node, e1) != ev.holds(v.node, e2)


@given(st.randoms(use_true_random=False))
def test_equiv_is_an_equivalence(rng):
    es = [random_node(rng, AB, "full", 1, 3) for _ in range(3)]
    rel = {(i, j): equiv_node(es[i], es[j], "full", AB).equivalent for i in range(3) for j in range(3)}
    for i in range(3):
        assert rel[i, i]
        for j in range(3):
            assert rel[i, j] == rel[j, i]
            for k in range(3):
                if rel[i, j] and rel[j, k]:
                    assert rel[i, k]
