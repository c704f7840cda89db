"""Brute-force semantic oracle.

Small data trees are enumerated exhaustively, up to renaming of data
classes and reordering of siblings, and expressions are checked on them
with the evaluator alone.  Nothing here depends on normal forms, so the
oracle can validate the rest of the package.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, asdict, field
from typing import Callable, Iterable, Iterator, Sequence

from .ast import (
    And, Atom, BotPath, Concat, Diamond, Down, Eps, EqDiamond, FalseNode, Fragment, NeqDiamond, NodeExpr,
    Not, Or, PathExpr, Test, TrueNode, Union, dd_node, print_node,
)
from .semantics import DataTree, Evaluator, NodeRecord, print_tree

__all__ = [
    "Bounds", "DEFAULT_BOUNDS", "enum_trees", "enum_stratum", "trees", "canonical_key", "brute_sat",
    "brute_sat_many", "brute_equiv", "random_node", "random_path", "random_tree",
    "default_corpus", "cross_check", "CrossCheckReport", "Disagreement",
]


@dataclass(frozen=True)
class Bounds:
    max_nodes: int = 5
    max_depth: int = 2
    max_branch: int = 4
    max_classes: int = 5

    def __post_init__(self):
        if self.max_nodes < 1 or self.max_classes < 1 or self.max_depth < 0 or self.max_branch < 0:
            raise ValueError("bounds must be positive")

    def __str__(self) -> str:
        return (f"max_nodes={self.max_nodes} max_depth={self.max_depth} "
                f"max_branch={self.max_branch} max_classes={self.max_classes}")


DEFAULT_BOUNDS = Bounds()


# ---------------------------------------------------------------------------
# enumeration

def _shapes(n: int, depth: int, branch: int) -> list[tuple]:
    """Unordered rooted shapes with n nodes, as nested tuples with sorted children."""
    return _shapes_memo(n, depth, branch)


_shape_cache: dict = {}


def _shapes_memo(n: int, depth: int, branch: int) -> list[tuple]:
    key = (n, depth, branch)
    if key in _shape_cache:
        return _shape_cache[key]
    out: list[tuple] = []
    if n == 1:
        out = [()]
    elif depth > 0 and branch > 0:
        seen = set()
        for kids in _forests(n - 1, depth - 1, branch, branch):
            if kids not in seen:
                seen.add(kids)
                out.append(kids)
    _shape_cache[key] = out
    return out


def _forests(n: int, depth: int, branch: int, slots: int, bound=None) -> Iterator[tuple]:
    """Multisets of shapes (sorted, non-increasing) with n nodes in total."""
    if n == 0:
        yield ()
        return
    if slots == 0:
        return
    for size in range(n, 0, -1):
        for s in _shapes_memo(size, depth, branch):
            key = (size, s)
            if bound is not None and key > bound:
                continue
            for rest in _forests(n - size, depth, branch, slots - 1, key):
                yield (s,) + rest


def _rgs(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n with at most k blocks."""
    def go(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(min(top + 2, k)):
            prefix.append(c)
            yield from go(prefix, max(top, c))
            prefix.pop()
    if n:
        yield from go([0], 0)


def _preorder_parents(shape: tuple) -> list[int | None]:
    parents: list[int | None] = []

    def go(s, p):
        me = len(parents)
        parents.append(p)
        for k in s:
            go(k, me)
    go(shape, None)
    return parents


def _build(parents: Sequence[int | None], labels: Sequence[str], data: Sequence[int]) -> DataTree:
    kids: list[list[int]] = [[] for _ in parents]
    for x, p in enumerate(parents):
        if p is not None:
            kids[p].append(x)
    return DataTree({x: NodeRecord(labels[x], data[x], tuple(kids[x])) for x in range(len(parents))}, 0)


def canonical_key(t: DataTree) -> tuple:
    """A key equal for two trees iff they agree up to class renaming and sibling order."""
    def orders(x):
        kids = t.children(x)
        sub = [orders(k) for k in kids]
        out = []
        for perm in itertools.permutations(range(len(kids))):
            for choice in itertools.product(*(sub[i] for i in perm)):
                seq = [(t.label(x), t.data(x), len(kids))]
                for c in choice:
                    seq.extend(c)
                out.append(seq)
        return out

    best = None
    for seq in orders(t.root):
        ren: dict[int, int] = {}
        key = tuple((lab, ren.setdefault(d, len(ren)), k) for lab, d, k in seq)
        if best is None or key < best:
            best = key
    return best


def enum_stratum(alphabet: Iterable[str], nodes: int, max_depth: int, max_branch: int,
                 max_classes: int) -> Iterator[DataTree]:
    """All trees with exactly ``nodes`` nodes within the other bounds, each once."""
    alphabet = sorted(set(alphabet))
    seen: set = set()
    for shape in _shapes(nodes, max_depth, max_branch):
        parents = _preorder_parents(shape)
        for labels in itertools.product(alphabet, repeat=nodes):
            for data in _rgs(nodes, max_classes):
                t = _build(parents, labels, data)
                key = canonical_key(t)
                if key in seen:
                    continue
                seen.add(key)
                yield t


def enum_trees(alphabet: Iterable[str], max_nodes: int, max_depth: int, max_branch: int,
               max_classes: int) -> Iterator[DataTree]:
    """Every data tree within the bounds, exactly once up to class renaming and sibling order.

    Order: node count, then shape, then labels in preorder, then the class
    partition as a restricted growth string.
    """
    alphabet = list(alphabet)
    for n in range(1, max_nodes + 1):
        yield from enum_stratum(alphabet, n, max_depth, max_branch, max_classes)


def _trees(alphabet, bounds: Bounds) -> Iterator[DataTree]:
    return enum_trees(alphabet, bounds.max_nodes, bounds.max_depth, bounds.max_branch, bounds.max_classes)


_tree_cache: dict = {}


def trees(alphabet: Iterable[str], bounds: Bounds = DEFAULT_BOUNDS) -> list[DataTree]:
    """The enumeration as a cached list."""
    key = (tuple(sorted(set(alphabet))), bounds)
    got = _tree_cache.get(key)
    if got is None:
        got = _tree_cache.setdefault(key, list(_trees(key[0], bounds)))
    return got


# ---------------------------------------------------------------------------
# model search

EvaluatorFactory = Callable[[DataTree], Evaluator]


def brute_sat(phi: NodeExpr, alphabet: Iterable[str], bounds: Bounds = DEFAULT_BOUNDS,
              evaluator: EvaluatorFactory = Evaluator) -> DataTree | None:
    """The first tree in enumeration order whose root satisfies ``phi``, if any."""
    for t in trees(alphabet, bounds):
        if evaluator(t).holds(t.root, phi):
            return t
    return None


def brute_sat_many(phis: Sequence[NodeExpr], alphabet: Iterable[str], bounds: Bounds = DEFAULT_BOUNDS,
                   evaluator: EvaluatorFactory = Evaluator) -> list[DataTree | None]:
    """``brute_sat`` for many expressions in a single pass over the trees."""
    found: list[DataTree | None] = [None] * len(phis)
    todo = set(range(len(phis)))
    for t in trees(alphabet, bounds):
        if not todo:
            break
        ev = evaluator(t)
        for i in list(todo):
            if ev.holds(t.root, phis[i]):
                found[i] = t
                todo.discard(i)
    return found


def brute_equiv(e1: NodeExpr, e2: NodeExpr, alphabet: Iterable[str], bounds: Bounds = DEFAULT_BOUNDS,
                evaluator: EvaluatorFactory = Evaluator, anywhere: bool = True) -> tuple[DataTree, int] | None:
    """A (tree, node) where the two expressions differ, or None within bounds."""
    for t in trees(alphabet, bounds):
        ev = evaluator(t)
        m1, m2 = ev.nodes(e1), ev.nodes(e2)
        diff = m1 ^ m2
        if not anywhere:
            diff &= 1
        if diff:
            idx = (diff & -diff).bit_length() - 1
            return t, t.nodes[idx]
    return None


# ---------------------------------------------------------------------------
# random generation

def random_path(rng: random.Random, alphabet: Sequence[str], fragment: Fragment | str = Fragment.FULL,
                max_dd: int = 1, size: int = 3) -> PathExpr:
    """A random path expression with downward depth at most ``max_dd``."""
    fragment = Fragment.coerce(fragment)
    return _rpath(rng, list(alphabet), fragment, max_dd, size)


def random_node(rng: random.Random, alphabet: Sequence[str], fragment: Fragment | str = Fragment.FULL,
                max_dd: int = 1, size: int = 4) -> NodeExpr:
    """A random node expression with downward depth at most ``max_dd``."""
    fragment = Fragment.coerce(fragment)
    e = _rnode(rng, list(alphabet), fragment, max_dd, size)
    assert dd_node(e) <= max_dd
    return e


def _rnode(rng, alphabet, fragment, dd, size) -> NodeExpr:
    if size <= 1:
        r = rng.random()
        if r < 0.6:
            return Atom(rng.choice(alphabet))
        if r < 0.7:
            return TrueNode() if rng.random() < 0.5 else FalseNode()
        return Diamond(_rpath(rng, alphabet, fragment, dd, 1))
    kinds = ["not", "and", "or", "diamond", "eq"]
    if fragment is Fragment.FULL:
        kinds.append("neq")
    k = rng.choice(kinds)
    if k == "not":
        return Not(_rnode(rng, alphabet, fragment, dd, size - 1))
    if k in ("and", "or"):
        left = rng.randint(1, size - 1)
        cls = And if k == "and" else Or
        return cls(_rnode(rng, alphabet, fragment, dd, left), _rnode(rng, alphabet, fragment, dd, size - left))
    if k == "diamond":
        return Diamond(_rpath(rng, alphabet, fragment, dd, size - 1))
    half = max(1, (size - 1) // 2)
    l = _rpath(rng, alphabet, fragment, dd, half)
    r = _rpath(rng, alphabet, fragment, dd, max(1, size - 1 - half))
    return (EqDiamond if k == "eq" else NeqDiamond)(l, r)


def _rpath(rng, alphabet, fragment, dd, size) -> PathExpr:
    """Paths are built left to right so each child step lowers the depth left for what follows."""
    if size <= 1 or dd == 0:
        choices = ["eps", "test"] + (["down"] if dd > 0 else [])
        k = rng.choice(choices)
        if k == "eps":
            return Eps()
        if k == "down":
            return Down()
        if rng.random() < 0.1:
            return BotPath()
        return Test(_rnode(rng, alphabet, fragment, 0, 1 if size <= 1 else min(size - 1, 2)))
    k = rng.choice(["concat", "union", "down_test", "test"])
    if k == "union":
        left = rng.randint(1, size - 1)
        return Union(_rpath(rng, alphabet, fragment, dd, left), _rpath(rng, alphabet, fragment, dd, size - left))
    if k == "test":
        return Test(_rnode(rng, alphabet, fragment, dd, size - 1))
    if k == "down_test":
        return Concat(Down(), Test(_rnode(rng, alphabet, fragment, dd - 1, max(1, size - 1))))
    # a concatenation whose first half consumes one level
    return Concat(Concat(Down(), Test(_rnode(rng, alphabet, fragment, dd - 1, 1))),
                  _rpath(rng, alphabet, fragment, dd - 1, size - 1))


def random_tree(rng: random.Random, alphabet: Sequence[str], max_nodes: int = 8, max_depth: int = 3,
                max_classes: int = 4) -> DataTree:
    """A random data tree: nodes attach to random parents above the depth limit."""
    n = rng.randint(1, max_nodes)
    parents: list[int | None] = [None]
    depth = [0]
    for _ in range(1, n):
        options = [x for x in range(len(parents)) if depth[x] < max_depth]
        if not options:
            break
        p = rng.choice(options)
        parents.append(p)
        depth.append(depth[p] + 1)
    labels = [rng.choice(list(alphabet)) for _ in parents]
    data = [rng.randrange(max_classes) for _ in parents]
    return _build(parents, labels, data)


# ---------------------------------------------------------------------------
# differential checking

@dataclass
class Disagreement:
    kind: str
    expr: str
    decision: str
    oracle: str
    tree: str | None = None


@dataclass
class CrossCheckReport:
    fragment: str
    bounds: str
    checked: int = 0
    disagreements: list[Disagreement] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_dict(self) -> dict:
        return asdict(self) | {"ok": self.ok}

    def lines(self) -> list[str]:
        out = [f"cross-check fragment={self.fragment} {self.bounds}: {self.checked} checks, "
               f"{len(self.disagreements)} disagreements"]
        for d in self.disagreements:
            out.append(f"  {d.kind}: {d.expr}: decision={d.decision} oracle={d.oracle}"
                       + (f" tree={d.tree}" if d.tree else ""))
        return out


def default_corpus(fragment: Fragment | str, alphabet: Iterable[str], seed: int = 0, fuzzed: int = 100
                   ) -> tuple[list[NodeExpr], list[tuple[NodeExpr, NodeExpr]]]:
    """Single-diamond formulas over P_1 with their negations, plus fuzzed Boolean combinations.

    Returns the satisfiability corpus and a list of expression pairs for
    equivalence checking.
    """
    from .normal_form import DiamondAtom, enum_P, path_expression

    fragment = Fragment.coerce(fragment)
    alphabet = sorted(set(alphabet))
    paths = [path_expression(p) for p in enum_P(1, fragment, alphabet)]
    ops = [EqDiamond] if fragment is Fragment.EQ else [EqDiamond, NeqDiamond]
    singles: list[NodeExpr] = []
    for p in paths:
        for q in paths:
            for op in ops:
                d = op(p, q)
                singles.extend([d, Not(d)])
    rng = random.Random(seed)
    combos: list[NodeExpr] = []
    for _ in range(fuzzed):
        k = rng.randint(2, 3)
        parts = [rng.choice(singles + [Atom(a) for a in alphabet]) for _ in range(k)]
        e = parts[0]
        for p in parts[1:]:
            e = (And if rng.random() < 0.6 else Or)(e, p)
        if rng.random() < 0.3:
            e = Not(e)
        combos.append(e)
    pairs = []
    for _ in range(fuzzed):
        pairs.append((rng.choice(combos), rng.choice(combos + singles)))
    return singles + combos, pairs


def cross_check(fragment: Fragment | str, corpus: Sequence[NodeExpr] | None = None,
                pairs: Sequence[tuple[NodeExpr, NodeExpr]] | None = None,
                alphabet: Iterable[str] = ("a", "b"), bounds: Bounds = DEFAULT_BOUNDS, seed: int = 0,
                evaluator: EvaluatorFactory = Evaluator) -> CrossCheckReport:
    """Compare decision.sat and decision.equiv with brute-force search.

    Expressions in the corpus must have downward depth at most 1 so that the
    oracle bounds are exhaustive.  ``evaluator`` is used only by the oracle
    side, which lets a deliberately broken evaluator be detected.
    """
    from .decision import equiv_node, sat

    fragment = Fragment.coerce(fragment)
    alphabet = sorted(set(alphabet))
    if corpus is None or pairs is None:
        dc, dp = default_corpus(fragment, alphabet, seed)
        corpus = dc if corpus is None else corpus
        pairs = dp if pairs is None else pairs
    report = CrossCheckReport(fragment.value, str(bounds))
    found = brute_sat_many(list(corpus), alphabet, bounds, evaluator)
    for e, t in zip(corpus, found):
        report.checked += 1
        verdict = sat(e, fragment, alphabet)
        if verdict.sat != (t is not None):
            report.disagreements.append(Disagreement(
                "sat", print_node(e), "SAT" if verdict.sat else "UNSAT",
                "SAT" if t is not None else f"UNSAT within {bounds}",
                print_tree(t) if t is not None else (print_tree(verdict.model) if verdict.model else None)))
    for e1, e2 in pairs:
        report.checked += 1
        verdict = equiv_node(e1, e2, fragment, alphabet)
        sep = brute_equiv(e1, e2, alphabet, bounds, evaluator)
        if verdict.equivalent != (sep is None):
            report.disagreements.append(Disagreement(
                "equiv", f"{print_node(e1)}  vs  {print_node(e2)}",
                "EQUIV" if verdict.equivalent else "DIFFER",
                "EQUIV within bounds" if sep is None else "DIFFER",
                print_tree(sep[0]) if sep else None))
    return report
