import itertools

import pytest

from xpd.ast import Fragment, parse_node
from xpd.canonical import (
    NotConsistent, build_model, classify, hung_subtrees, is_consistent, surgery_eq, surgery_full,
    verify_model,
)
from xpd.normal_form import (
    EQ, NEQ, NormalForm, TypeComputer, as_expression, enum_D, enum_N, enum_P, epsilon, make_atom,
    normalize_node, type_of,
)
from xpd.oracle import brute_sat, brute_sat_many
from xpd.semantics import DataTree, Evaluator, parse_tree, restrict

AB = ("a", "b")
N0 = "a & <eps=eps>"
A1 = "down[a & <eps=eps>]/eps"
B1 = "down[b & <eps=eps>]/eps"


def only_form(text, fragment, level=1):
    forms = normalize_node(parse_node(text, AB, fragment), fragment, AB, level)
    assert len(forms) == 1
    return forms[0]


def partition(t):
    order = {x: i for i, x in enumerate(t.nodes)}
    return sorted(sorted(order[x] for x in v) for v in t.classes().values())


def test_level_zero_is_a_single_node():
    for fragment in ("eq", "full"):
        for psi in enum_N(0, fragment, AB):
            t = build_model(psi)
            assert len(t) == 1 and t.label(t.root) == psi.label


def test_worked_example_eq():
    text = (f"{N0} & <{A1} = {B1}> & <{A1} = {A1}> & <{B1} = {B1}> & !<eps = {A1}> & !<eps = {B1}>")
    phi = only_form(text, "eq")
    t = build_model(phi)
    ev = Evaluator(t)
    assert ev.holds(t.root, parse_node(text, AB))
    root_class = t.data(t.root)
    assert all(t.data(x) != root_class for x in t.nodes if x != t.root)
    kids = t.children(t.root)
    assert any(t.label(x) == "a" and t.label(y) == "b" and t.data(x) == t.data(y) for x in kids for y in kids)
    # the smallest model has three nodes; the construction is free to use more
    small = brute_sat(parse_node(text, AB), AB)
    assert small is not None and len(small) == 3


def test_worked_example_full():
    psi = "a & <eps=eps> & !<eps != eps>"
    theta = "b & <eps=eps> & !<eps != eps>"
    p, q = f"down[{psi}]/eps", f"down[{theta}]/eps"
    text = (f"a & <eps=eps> & !<eps != eps> & <{p} = {q}> & <{p} = {p}> & <{q} = {q}>"
            f" & <eps != {p}> & <eps != {q}> & <{p} != {q}> & !<eps = {p}> & !<eps = {q}>"
            f" & <{q} != {q}> & <{p} != {p}>")
    phi = only_form(text, "full")
    t = build_model(phi)
    assert Evaluator(t).holds(t.root, parse_node(text, AB))
    assert brute_sat(parse_node(text, AB), AB) is not None


def test_eq_ax6_pattern_is_inconsistent():
    e, a1, b1 = epsilon(1), *[p for p in enum_P(1, "eq", AB) if not p.is_eps]
    pos = frozenset({make_atom(EQ, e, e), make_atom(EQ, e, a1), make_atom(EQ, e, b1),
                     make_atom(EQ, a1, a1), make_atom(EQ, b1, b1)})
    with pytest.raises(NotConsistent):
        build_model(NormalForm(Fragment.EQ, 1, "a", pos))
    assert not is_consistent("eq", AB, 1, "a", pos)


def test_v_eq_neq_classification():
    e = epsilon(1)
    a1 = next(p for p in enum_P(1, "full", AB) if not p.is_eps and p.steps[0].label == "a")
    pos = frozenset({make_atom(EQ, e, e), make_atom(EQ, e, a1), make_atom(NEQ, e, a1),
                     make_atom(EQ, a1, a1), make_atom(NEQ, a1, a1)})
    cl = classify(NormalForm(Fragment.FULL, 1, "a", pos))
    assert [alpha for _, alpha in cl.v_eq_neq] == [epsilon(0)]
    assert not cl.v_noeq_noneq


def test_child_shares_root_class():
    e = epsilon(1)
    a1 = next(p for p in enum_P(1, "full", AB) if not p.is_eps and p.steps[0].label == "a")
    pos = frozenset({make_atom(EQ, e, e), make_atom(EQ, e, a1), make_atom(EQ, a1, a1)})
    t = build_model(NormalForm(Fragment.FULL, 1, "a", pos))
    assert all(t.data(c) == t.data(t.root) for c in t.children(t.root))


@pytest.mark.parametrize("fragment", ["eq", "full"])
def test_level_one_models_verify(fragment):
    forms = list(enum_N(1, fragment, AB))
    for psi in forms:
        t = build_model(psi)
        assert verify_model(psi, t)
        assert Evaluator(t).holds(t.root, as_expression(psi, AB))
        assert len(t) >= 1


@pytest.mark.parametrize("fragment", ["eq", "full"])
def test_subtrees_survive_gluing(fragment):
    for psi in enum_N(1, fragment, AB):
        t, parts = hung_subtrees(psi)
        assert t == build_model(psi)
        assert {c for c, _ in parts} == set(t.children(t.root))
        for c, sub in parts:
            assert partition(restrict(t, c)) == partition(sub)
            assert type_of(restrict(t, c), c, 0, fragment) == type_of(t, c, 0, fragment)


def _candidates(fragment):
    atoms = enum_D(1, fragment, AB)
    e = epsilon(1)
    forced = make_atom(EQ, e, e)
    free = [d for d in atoms if d != forced and d != make_atom(NEQ, e, e)]
    for label in AB:
        for k in range(len(free) + 1):
            for chosen in itertools.combinations(free, k):
                yield NormalForm(Fragment.coerce(fragment), 1, label, frozenset((forced, *chosen)))


@pytest.mark.parametrize("fragment", ["eq", pytest.param("full", marks=pytest.mark.slow)])
def test_consistency_agrees_with_search(fragment):
    cands = list(_candidates(fragment))
    assert len(cands) == {"eq": 64, "full": 2048}[fragment]
    found = brute_sat_many([as_expression(c, AB) for c in cands], AB)
    for c, t in zip(cands, found):
        assert is_consistent(fragment, AB, 1, c.label, c.positives) == (t is not None)


def test_surgery_eq_gives_fresh_end():
    t = parse_tree("(a 0 (a 0))", AB)
    psi = type_of(t, t.root, 1, "eq")
    alpha = next(p for p in TypeComputer(t, "eq").paths(t.root, 1) if not p.is_eps)
    w = surgery_eq(psi, t, alpha, [epsilon(1)])
    assert type_of(w.tree, w.tree.root, 1, "eq") == psi
    assert w.tree.data(w.x) != w.tree.data(w.tree.root)


def test_surgery_on_eps_is_identity():
    t = parse_tree("(a 0 (b 1))", AB)
    psi = type_of(t, t.root, 1, "full")
    for surgery in (surgery_eq, surgery_full):
        w = surgery(psi, t, epsilon(1), [])
        assert w.x == w.tree.root


def test_build_is_deterministic():
    psi = next(iter(enum_N(1, "full", AB)))
    assert hung_subtrees(psi)[0] == hung_subtrees(psi)[0]


def test_level_two_realized_types_rebuild():
    t = parse_tree("(a 0 (a 0 (b 1)) (b 1))", AB)
    for fragment in ("eq", "full"):
        for x in t.nodes:
            psi = type_of(t, x, 2, fragment)
            m = build_model(psi)
            assert type_of(m, m.root, 2, fragment) == psi
            assert isinstance(m, DataTree)
