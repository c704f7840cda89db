import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from xpd.ast import EqDiamond, NeqDiamond, parse_node
from xpd.decision import sat
from xpd.oracle import (
    Bounds, brute_equiv, brute_sat, canonical_key, cross_check, default_corpus, enum_stratum,
    enum_trees, random_node, random_tree, trees,
)
from xpd.semantics import Evaluator, print_tree

AB = ("a", "b")


def test_tiny_strata():
    assert len(list(enum_stratum(["a"], 2, 1, 1, 2))) == 2
    assert len(list(enum_stratum(AB, 2, 1, 1, 2))) == 8


def test_tiny_streams_include_single_nodes():
    assert len(list(enum_trees(["a"], 2, 1, 1, 2))) == 3
    assert len(list(enum_trees(AB, 2, 1, 1, 2))) == 10


def _naive_count(alphabet, max_nodes, max_depth, max_branch, max_classes):
    """Count trees up to isomorphism by brute force over all orderings."""

    def shapes(n, depth):
        # ordered trees with n nodes as nested tuples of children
        if n == 1:
            yield ()
            return
        if depth == 0:
            return
        for k in range(1, min(max_branch, n - 1) + 1):
            for sizes in itertools.product(range(1, n), repeat=k):
                if sum(sizes) != n - 1:
                    continue
                for kids in itertools.product(*[list(shapes(s, depth - 1)) for s in sizes]):
                    yield kids

    def preorder(shape, out, parent):
        i = len(out)
        out.append(parent)
        for c in shape:
            preorder(c, out, i)
        return out

    def orderings(t, x):
        # every sibling reordering, as preorder lists of (label, class, arity)
        kids = [c for c in range(len(t)) if t[c][0] == x]
        for perm in itertools.permutations(kids):
            for rest in itertools.product(*[list(orderings(t, c)) for c in perm]):
                yield [(*t[x][1], len(kids))] + [v for r in rest for v in r]

    def key(t):
        best = None
        for seq in orderings(t, 0):
            ren = {}
            cand = tuple((lab, ren.setdefault(c, len(ren)), arity) for lab, c, arity in seq)
            best = cand if best is None or cand < best else best
        return best

    seen = set()
    for n in range(1, max_nodes + 1):
        for shape in shapes(n, max_depth):
            parents = preorder(shape, [], None)
            for labels in itertools.product(alphabet, repeat=n):
                for classes in itertools.product(range(min(n, max_classes)), repeat=n):
                    if len(set(classes)) > max_classes:
                        continue
                    t = [(parents[i], (labels[i], classes[i])) for i in range(n)]
                    seen.add(key(t))
    return len(seen)


@pytest.mark.parametrize("alphabet, bounds", [
    (("a",), (3, 2, 2, 3)),
    (AB, (3, 2, 2, 2)),
    (AB, (4, 2, 3, 2)),
    (("a",), (4, 3, 3, 4)),
])
def test_counts_match_naive_enumeration(alphabet, bounds):
    assert len(list(enum_trees(alphabet, *bounds))) == _naive_count(alphabet, *bounds)


def test_default_trees_are_distinct():
    ts = trees(AB)
    assert len({canonical_key(t) for t in ts}) == len(ts) == 4040


def test_canonical_key_ignores_sibling_order_and_class_names():
    from xpd.semantics import parse_tree
    t1 = parse_tree("(a 0 (b 1) (a 2 (b 1)))", AB)
    t2 = parse_tree("(a 5 (a 9 (b 3)) (b 3))", AB)
    assert canonical_key(t1) == canonical_key(t2)


def test_brute_sat_basics():
    assert brute_sat(parse_node("a & !a", AB), AB) is None
    t = brute_sat(parse_node("<down != down>", AB), AB)
    assert print_tree(t) == "(a 0 (a 0) (a 1))"
    assert brute_sat(parse_node("<down/down>", AB), AB, Bounds(5, 1, 4, 5)) is None


def test_brute_equiv():
    assert brute_equiv(parse_node("<eps = eps>", AB), parse_node("true", AB), AB) is None
    t, x = brute_equiv(parse_node("a", AB), parse_node("b", AB), AB)
    assert Evaluator(t).holds(x, parse_node("a | b", AB))


@given(st.randoms(use_true_random=False), st.sampled_from(["eq", "full"]))
def test_search_implies_sat(rng, fragment):
    phi = random_node(rng, AB, fragment, 1, 4)
    found = brute_sat(phi, AB)
    verdict = sat(phi, fragment, AB)
    assert verdict.sat == (found is not None)


@given(st.randoms(use_true_random=False))
def test_random_trees_respect_bounds(rng):
    t = random_tree(rng, AB, max_nodes=8, max_depth=3, max_classes=4)
    assert 1 <= len(t) <= 8
    assert t.height() <= 3
    assert len(t.classes()) <= 4


def test_cross_check_passes():
    report = cross_check("eq", alphabet=AB, seed=0)
    assert report.ok and report.checked > 100


class SwappedEvaluator(Evaluator):
    """A deliberately wrong evaluator: = and != trade places."""

    def _node(self, e):
        if isinstance(e, EqDiamond):
            return super()._node(NeqDiamond(e.left, e.right))
        if isinstance(e, NeqDiamond):
            return super()._node(EqDiamond(e.left, e.right))
        return super()._node(e)


@pytest.mark.parametrize("fragment", ["eq", "full"])
def test_cross_check_catches_broken_evaluator(fragment):
    corpus, pairs = default_corpus(fragment, AB, seed=1, fuzzed=10)
    report = cross_check(fragment, corpus, pairs, AB, evaluator=SwappedEvaluator)
    assert not report.ok
    assert report.disagreements[0].kind in ("sat", "equiv")


def test_corpus_is_deterministic():
    assert default_corpus("full", AB, seed=3) == default_corpus("full", AB, seed=3)
    assert random_node(random.Random(4), AB) == random_node(random.Random(4), AB)
