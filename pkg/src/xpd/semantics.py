"""Data trees and the evaluator.

A data tree is a finite tree with a label and a data class id on every
node.  Two nodes carry the same data value exactly when their class ids are
equal, so the ids only matter up to renaming.

Evaluation works on bitmasks: a node set is an ``int`` whose bit ``i`` is the
node at position ``i``, and a path denotation is a list holding, for each
node, the mask of nodes reachable from it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .ast import (
    And, Atom, BotPath, Concat, Diamond, Down, Eps, EqDiamond, FalseNode, NeqDiamond, NodeExpr,
    Not, Or, PathExpr, Test, TrueNode, Union,
)

__all__ = [
    "DataTree", "TreeSyntaxError", "Evaluator", "parse_tree", "print_tree",
    "eval_node", "eval_path", "node_set", "pair_set", "restrict",
]


class TreeSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class NodeRecord:
    label: str
    data: int
    children: tuple[int, ...]


class DataTree:
    """An immutable data tree.

    ``nodes`` maps node ids to :class:`NodeRecord`.  Ids are arbitrary
    integers; :func:`restrict` keeps the ids of the original tree, which is
    what makes ``eval_node(t, x, phi) == eval_node(restrict(t, x), x, phi)``
    a meaningful comparison.
    """

    __slots__ = ("_nodes", "root", "_order", "_pos", "_parent")

    def __init__(self, nodes: Mapping[int, NodeRecord], root: int):
        self._nodes = dict(nodes)
        self.root = root
        if root not in self._nodes:
            raise ValueError(f"root {root} is not a node")
        order: list[int] = []
        parent: dict[int, int | None] = {root: None}
        stack = [root]
        while stack:
            x = stack.pop()
            order.append(x)
            for c in reversed(self._nodes[x].children):
                if c not in self._nodes:
                    raise ValueError(f"child {c} of node {x} is not a node")
                if c in parent:
                    raise ValueError(f"node {c} has two parents or lies on a cycle")
                parent[c] = x
                stack.append(c)
        if len(order) != len(self._nodes):
            raise ValueError("some nodes are not reachable from the root")
        self._order = tuple(order)
        self._pos = {x: i for i, x in enumerate(order)}
        self._parent = parent

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_nested(cls, shape) -> "DataTree":
        """Build from nested ``(label, data, [children...])`` tuples, ids in preorder."""
        nodes: dict[int, NodeRecord] = {}

        def build(s) -> int:
            label, data, *rest = s
            kids = rest[0] if rest else ()
            my = len(nodes)
            nodes[my] = None  # reserve the id
            ids = tuple(build(k) for k in kids)
            nodes[my] = NodeRecord(label, int(data), ids)
            return my

        build(shape)
        return cls(nodes, 0)

    def to_nested(self, x: int | None = None):
        x = self.root if x is None else x
        r = self._nodes[x]
        return (r.label, r.data, [self.to_nested(c) for c in r.children])

    # -- accessors -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, x) -> bool:
        return x in self._nodes

    def __eq__(self, other) -> bool:
        return (isinstance(other, DataTree) and self.root == other.root
                and self._nodes == other._nodes)

    def __hash__(self) -> int:
        return hash((self.root, tuple(sorted(self._nodes.items()))))

    def __repr__(self) -> str:
        return f"DataTree({print_tree(self)!r})"

    def __str__(self) -> str:
        return print_tree(self)

    @property
    def nodes(self) -> tuple[int, ...]:
        """Node ids in preorder (children in their stored order)."""
        return self._order

    def record(self, x: int) -> NodeRecord:
        self._check(x)
        return self._nodes[x]

    def label(self, x: int) -> str:
        return self.record(x).label

    def data(self, x: int) -> int:
        return self.record(x).data

    def children(self, x: int) -> tuple[int, ...]:
        return self.record(x).children

    def parent(self, x: int) -> int | None:
        self._check(x)
        return self._parent[x]

    def depth(self, x: int) -> int:
        d = 0
        while self._parent[x] is not None:
            x = self._parent[x]
            d += 1
        return d

    def height(self) -> int:
        return max(self.depth(x) for x in self._order)

    def descendants(self, x: int) -> list[int]:
        """``x`` and all nodes below it, in preorder."""
        self._check(x)
        out, stack = [], [x]
        while stack:
            y = stack.pop()
            out.append(y)
            stack.extend(reversed(self._nodes[y].children))
        return out

    def classes(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for x in self._order:
            out.setdefault(self._nodes[x].data, []).append(x)
        return out

    def labels(self) -> set[str]:
        return {r.label for r in self._nodes.values()}

    def position(self, x: int) -> int:
        self._check(x)
        return self._pos[x]

    def _check(self, x: int) -> None:
        if x not in self._nodes:
            raise KeyError(f"unknown node id {x!r}")

    def node_at(self, address: Sequence[int]) -> int:
        """Follow child indices from the root, e.g. ``(1, 0)``."""
        x = self.root
        for i in address:
            kids = self._nodes[x].children
            if not 0 <= i < len(kids):
                raise KeyError(f"node {x} has no child {i}")
            x = kids[i]
        return x

    def normalized(self) -> "DataTree":
        """Same shape and ids, with class ids renumbered in first-visit preorder."""
        ren: dict[int, int] = {}
        for x in self._order:
            ren.setdefault(self._nodes[x].data, len(ren))
        return DataTree({x: NodeRecord(r.label, ren[r.data], r.children) for x, r in self._nodes.items()},
                        self.root)

    def relabel_ids(self) -> "DataTree":
        """Renumber node ids 0..n-1 in preorder."""
        ren = {x: i for i, x in enumerate(self._order)}
        return DataTree({ren[x]: NodeRecord(r.label, r.data, tuple(ren[c] for c in r.children))
                         for x, r in self._nodes.items()}, ren[self.root])


def restrict(t: DataTree, x: int) -> DataTree:
    """The subtree hanging from ``x``; node ids and class ids are kept verbatim."""
    keep = t.descendants(x)
    return DataTree({y: t.record(y) for y in keep}, x)


# ---------------------------------------------------------------------------
# concrete syntax: (LABEL NAT tree*)

_TREE_TOKEN = re.compile(r"\s*(\(|\)|[a-z][a-z0-9_]*|\d+)")


def parse_tree(text: str, alphabet: Iterable[str] | None = None) -> DataTree:
    alphabet = None if alphabet is None else set(alphabet)
    toks: list[tuple[str, int]] = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TREE_TOKEN.match(stripped, pos)
        if not m:
            raise TreeSyntaxError(f"unexpected character at position {pos}")
        toks.append((m.group(1), m.start(1)))
        pos = m.end()
    i = 0

    def take():
        nonlocal i
        if i >= len(toks):
            raise TreeSyntaxError("unexpected end of input")
        t = toks[i]
        i += 1
        return t

    def tree():
        tok, p = take()
        if tok != "(":
            raise TreeSyntaxError(f"expected '(' at position {p}")
        label, p = take()
        if not re.fullmatch(r"[a-z][a-z0-9_]*", label):
            raise TreeSyntaxError(f"expected a label at position {p}")
        if alphabet is not None and label not in alphabet:
            raise TreeSyntaxError(f"unknown label {label!r} at position {p}")
        data, p = take()
        if not data.isdigit():
            raise TreeSyntaxError(f"expected a class id at position {p}")
        kids = []
        while True:
            if i >= len(toks):
                raise TreeSyntaxError("unexpected end of input")
            if toks[i][0] == ")":
                take()
                break
            kids.append(tree())
        return (label, int(data), kids)

    shape = tree()
    if i != len(toks):
        raise TreeSyntaxError(f"trailing input at position {toks[i][1]}")
    return DataTree.from_nested(shape)


def print_tree(t: DataTree, x: int | None = None) -> str:
    x = t.root if x is None else x
    r = t.record(x)
    inner = " ".join([r.label, str(r.data)] + [print_tree(t, c) for c in r.children])
    return f"({inner})"


# ---------------------------------------------------------------------------
# evaluation

class Evaluator:
    """Memoizing evaluator bound to one tree.

    Masks are indexed by preorder position.  The memo tables live on the
    instance, so an evaluator can be reused across many formulas on the same
    tree but is never shared between trees.
    """

    def __init__(self, tree: DataTree):
        self.tree = tree
        order = tree.nodes
        self.size = len(order)
        self.full = (1 << self.size) - 1
        pos = {x: i for i, x in enumerate(order)}
        self._children = []
        for x in order:
            m = 0
            for c in tree.children(x):
                m |= 1 << pos[c]
            self._children.append(m)
        cls_ids: dict[int, int] = {}
        self._cls = []
        for x in order:
            self._cls.append(1 << cls_ids.setdefault(tree.data(x), len(cls_ids)))
        self._labels = [tree.label(x) for x in order]
        self._node_memo: dict[NodeExpr, int] = {}
        self._path_memo: dict[PathExpr, list[int]] = {}

    def _bits(self, mask: int) -> Iterator[int]:
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def class_mask(self, nodes: int) -> int:
        out = 0
        cls = self._cls
        for i in self._bits(nodes):
            out |= cls[i]
        return out

    def nodes(self, e: NodeExpr) -> int:
        m = self._node_memo.get(e)
        if m is None:
            m = self._node(e)
            self._node_memo[e] = m
        return m

    def path(self, a: PathExpr) -> list[int]:
        r = self._path_memo.get(a)
        if r is None:
            r = self._path(a)
            self._path_memo[a] = r
        return r

    def _node(self, e: NodeExpr) -> int:
        n = self.size
        if isinstance(e, Atom):
            m = 0
            for i, lab in enumerate(self._labels):
                if lab == e.name:
                    m |= 1 << i
            return m
        if isinstance(e, TrueNode):
            return self.full
        if isinstance(e, FalseNode):
            return 0
        if isinstance(e, Not):
            return self.full & ~self.nodes(e.arg)
        if isinstance(e, And):
            left = self.nodes(e.left)
            return left & self.nodes(e.right) if left else 0
        if isinstance(e, Or):
            return self.nodes(e.left) | self.nodes(e.right)
        if isinstance(e, Diamond):
            succ = self.path(e.path)
            return sum(1 << i for i in range(n) if succ[i])
        if isinstance(e, (EqDiamond, NeqDiamond)):
            left = self.path(e.left)
            right = self.path(e.right)
            eq = isinstance(e, EqDiamond)
            m = 0
            for i in range(n):
                if not left[i] or not right[i]:
                    continue
                a = self.class_mask(left[i])
                b = self.class_mask(right[i])
                if eq:
                    ok = bool(a & b)
                else:
                    # some pair of endpoints in different classes
                    ok = (a | b) & ((a | b) - 1) != 0
                if ok:
                    m |= 1 << i
            return m
        raise TypeError(f"not a node expression: {e!r}")

    def _path(self, a: PathExpr) -> list[int]:
        n = self.size
        if isinstance(a, Eps):
            return [1 << i for i in range(n)]
        if isinstance(a, Down):
            return list(self._children)
        if isinstance(a, BotPath):
            return [0] * n
        if isinstance(a, Test):
            s = self.nodes(a.node)
            return [(1 << i) if s >> i & 1 else 0 for i in range(n)]
        if isinstance(a, Union):
            left, right = self.path(a.left), self.path(a.right)
            return [x | y for x, y in zip(left, right)]
        if isinstance(a, Concat):
            left, right = self.path(a.left), self.path(a.right)
            out = []
            for i in range(n):
                m = 0
                for j in self._bits(left[i]):
                    m |= right[j]
                out.append(m)
            return out
        raise TypeError(f"not a path expression: {a!r}")

    # -- id-level helpers ------------------------------------------------------

    def holds(self, x: int, e: NodeExpr) -> bool:
        return bool(self.nodes(e) >> self.tree.position(x) & 1)

    def related(self, x: int, y: int, a: PathExpr) -> bool:
        return bool(self.path(a)[self.tree.position(x)] >> self.tree.position(y) & 1)

    def node_ids(self, mask: int) -> set[int]:
        order = self.tree.nodes
        return {order[i] for i in self._bits(mask)}

    def successors(self, x: int, a: PathExpr) -> set[int]:
        return self.node_ids(self.path(a)[self.tree.position(x)])


def eval_node(t: DataTree, x: int, e: NodeExpr) -> bool:
    if x not in t:
        raise KeyError(f"unknown node id {x!r}")
    return Evaluator(t).holds(x, e)


def eval_path(t: DataTree, x: int, y: int, a: PathExpr) -> bool:
    for z in (x, y):
        if z not in t:
            raise KeyError(f"unknown node id {z!r}")
    return Evaluator(t).related(x, y, a)


def node_set(t: DataTree, e: NodeExpr) -> set[int]:
    ev = Evaluator(t)
    return ev.node_ids(ev.nodes(e))


def pair_set(t: DataTree, a: PathExpr) -> set[tuple[int, int]]:
    ev = Evaluator(t)
    succ = ev.path(a)
    order = t.nodes
    return {(order[i], y) for i in range(len(order)) for y in ev.node_ids(succ[i])}
