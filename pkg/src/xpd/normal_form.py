"""Normal forms: the sets P_n, D_n and N_n, and normalization into them.

A member of N_n is stored as a label plus the set of its positive diamond
atoms; every other atom of D_n is implicitly negated.  Because members of
N_n are pairwise exclusive, a node expression of depth at most ``n`` is
equivalent to the disjunction of exactly those members that entail it.  The
normalizer therefore computes that set directly, using bitmasks over the
enumerated universe N_n.

Path expressions are normalized into guarded unions: a map from canonical
paths π ∈ P_n to the set of ψ ∈ N_n for which [ψ]π is a disjunct.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .ast import (
    And, Atom, BotPath, Concat, Diamond, Down, Eps, EqDiamond, FalseNode, Fragment, NeqDiamond,
    NodeExpr, Not, Or, PathExpr, Test, TrueNode, Union, DOWN, EPS, conj, dd_node, dd_path,
    desugar, flatten,
)
from .semantics import DataTree

__all__ = [
    "BudgetExceeded", "Limits", "DEFAULT_LIMITS", "NormalForm", "NormalPath", "DiamondAtom",
    "EQ", "NEQ", "epsilon", "make_atom", "enum_P", "enum_D", "enum_N", "universe",
    "is_normal_node", "lift", "lift_path", "project", "project_path", "complete_diamond",
    "normalize_node", "normalize_path", "as_expression", "path_expression", "type_of",
    "TypeComputer", "Normalizer", "candidate_count", "base_form",
]

EQ = "="
NEQ = "!="


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured budget or level cap."""

    def __init__(self, message: str, partial: int = 0):
        self.partial = partial
        super().__init__(f"{message} (examined {partial} candidates)")


@dataclass(frozen=True)
class Limits:
    level_cap: int = 2
    budget: int = 200_000


DEFAULT_LIMITS = Limits()


def _alphabet(alphabet: Iterable[str]) -> tuple[str, ...]:
    out = tuple(sorted(set(alphabet)))
    if not out:
        raise ValueError("the alphabet must not be empty")
    return out


# ---------------------------------------------------------------------------
# data types

@dataclass(frozen=True, eq=False)
class NormalPath:
    """A path ↓[ψ1]…↓[ψk]ε at level ``level``; ``steps[i]`` has level ``level - i - 1``."""

    steps: tuple["NormalForm", ...]
    level: int
    _h: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((self.level, self.steps)))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return self is other or (isinstance(other, NormalPath) and self._h == other._h
                                 and self.level == other.level and self.steps == other.steps)

    def __len__(self) -> int:
        return len(self.steps)

    @cached_property
    def key(self) -> tuple:
        return (len(self.steps), tuple(s.key for s in self.steps))

    def __lt__(self, other: "NormalPath") -> bool:
        return self.key < other.key

    @property
    def is_eps(self) -> bool:
        return not self.steps

    def head(self) -> "NormalForm":
        return self.steps[0]

    def tail(self) -> "NormalPath":
        """The path after the first step, one level lower."""
        return NormalPath(self.steps[1:], self.level - 1)

    def prepend(self, psi: "NormalForm") -> "NormalPath":
        return NormalPath((psi,) + self.steps, self.level + 1)

    def suffix(self, k: int) -> "NormalPath":
        return NormalPath(self.steps[k:], self.level - k)

    def __str__(self) -> str:
        return "".join(f"↓[{s.short()}]" for s in self.steps) + "ε"

    def __repr__(self) -> str:
        return f"NormalPath({self})"


@dataclass(frozen=True, eq=False)
class DiamondAtom:
    """⟨left op right⟩ with ``left`` not after ``right`` in the path order."""

    op: str
    left: NormalPath
    right: NormalPath
    _h: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.op not in (EQ, NEQ):
            raise ValueError(f"bad operator {self.op!r}")
        if self.left.level != self.right.level:
            raise ValueError("both paths of an atom must have the same level")
        if self.right.key < self.left.key:
            raise ValueError("atom sides are not in canonical order; use make_atom")
        object.__setattr__(self, "_h", hash((self.op, self.left, self.right)))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return self is other or (isinstance(other, DiamondAtom) and self._h == other._h
                                 and self.op == other.op and self.left == other.left
                                 and self.right == other.right)

    @property
    def level(self) -> int:
        return self.left.level

    @cached_property
    def key(self) -> tuple:
        return (self.left.key, self.right.key, self.op == NEQ)

    def __lt__(self, other: "DiamondAtom") -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        op = "=" if self.op == EQ else "≠"
        return f"⟨{self.left}{op}{self.right}⟩"

    def __repr__(self) -> str:
        return f"DiamondAtom({self})"


def make_atom(op: str, p: NormalPath, q: NormalPath) -> DiamondAtom:
    """Build an atom with its sides put in canonical order (symmetry of = and ≠)."""
    if q.key < p.key:
        p, q = q, p
    return DiamondAtom(op, p, q)


@dataclass(frozen=True, eq=False)
class NormalForm:
    """A member of N_n: a label and the set of positive atoms of D_n."""

    fragment: Fragment
    level: int
    label: str
    positives: frozenset
    _h: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "fragment", Fragment.coerce(self.fragment))
        object.__setattr__(self, "positives", frozenset(self.positives))
        for d in self.positives:
            if d.level != self.level:
                raise ValueError(f"atom {d} is not at level {self.level}")
            if d.op == NEQ and self.fragment is Fragment.EQ:
                raise ValueError("inequality atoms are not allowed in the 'eq' fragment")
        object.__setattr__(self, "_h", hash((self.fragment, self.level, self.label, self.positives)))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return self is other or (isinstance(other, NormalForm) and self._h == other._h
                                 and self.level == other.level and self.label == other.label
                                 and self.fragment == other.fragment
                                 and self.positives == other.positives)

    @cached_property
    def key(self) -> tuple:
        return (self.level, self.label, tuple(sorted(d.key for d in self.positives)))

    def __lt__(self, other: "NormalForm") -> bool:
        return self.key < other.key

    def has(self, d: DiamondAtom) -> bool:
        return d in self.positives

    def short(self) -> str:
        if self.level == 0:
            return self.label + "'"
        return f"{self.label}#{self.level}:{len(self.positives)}"

    def __str__(self) -> str:
        atoms = " ∧ ".join(str(d) for d in sorted(self.positives))
        return f"{self.label} ∧ {atoms}"

    def __repr__(self) -> str:
        return f"NormalForm({self.fragment.value}, {self.level}, {self})"


def epsilon(level: int) -> NormalPath:
    return NormalPath((), level)


def base_form(fragment: Fragment | str, label: str) -> NormalForm:
    """The level-0 member ``label ∧ ⟨ε=ε⟩`` (with ``¬⟨ε≠ε⟩`` implicit in the full fragment)."""
    e = epsilon(0)
    return NormalForm(Fragment.coerce(fragment), 0, label, frozenset([DiamondAtom(EQ, e, e)]))


# ---------------------------------------------------------------------------
# realized types of nodes in a concrete tree

class TypeComputer:
    """Computes the level-n normal form satisfied at each node of one tree.

    ``paths(x, n)`` maps every P_n path realized from ``x`` to its end
    points; ``type_of(x, n)`` reads off the label and the positive atoms.
    """

    def __init__(self, tree: DataTree, fragment: Fragment | str):
        self.tree = tree
        self.fragment = Fragment.coerce(fragment)
        self._paths: dict[tuple[int, int], dict[NormalPath, list[int]]] = {}
        self._types: dict[tuple[int, int], NormalForm] = {}

    def paths(self, x: int, n: int) -> dict[NormalPath, list[int]]:
        key = (x, n)
        got = self._paths.get(key)
        if got is not None:
            return got
        out: dict[NormalPath, list[int]] = {epsilon(n): [x]}
        if n > 0:
            for c in self.tree.children(x):
                t = self.type_of(c, n - 1)
                for p, ends in self.paths(c, n - 1).items():
                    out.setdefault(p.prepend(t), []).extend(ends)
        self._paths[key] = out
        return out

    def type_of(self, x: int, n: int) -> NormalForm:
        key = (x, n)
        got = self._types.get(key)
        if got is not None:
            return got
        realized = self.paths(x, n)
        data = self.tree.data
        items = sorted(realized.items(), key=lambda kv: kv[0].key)
        classes = [(p, {data(y) for y in ends}) for p, ends in items]
        pos = set()
        full = self.fragment is Fragment.FULL
        for i, (p, cp) in enumerate(classes):
            for q, cq in classes[i:]:
                if cp & cq:
                    pos.add(DiamondAtom(EQ, p, q))
                if full and len(cp | cq) >= 2:
                    pos.add(DiamondAtom(NEQ, p, q))
        nf = NormalForm(self.fragment, n, self.tree.label(x), frozenset(pos))
        self._types[key] = nf
        return nf


def type_of(tree: DataTree, x: int, n: int, fragment: Fragment | str) -> NormalForm:
    """The unique member of N_n true at node ``x`` of ``tree``."""
    return TypeComputer(tree, fragment).type_of(x, n)


# ---------------------------------------------------------------------------
# enumeration

_lock = threading.RLock()
_universes: dict[tuple, "Universe"] = {}


def enum_P(n: int, fragment: Fragment | str, alphabet: Iterable[str],
           limits: Limits = DEFAULT_LIMITS) -> list[NormalPath]:
    """P_n in canonical order (ε first)."""
    fragment = Fragment.coerce(fragment)
    alphabet = _alphabet(alphabet)
    if n < 0:
        raise ValueError("level must be non-negative")
    out = [epsilon(n)]
    if n == 0:
        return out
    lower = enum_P(n - 1, fragment, alphabet, limits)
    members = universe(n - 1, fragment, alphabet, limits).members
    if len(members) * len(lower) > limits.budget:
        raise BudgetExceeded(f"P_{n} has more than {limits.budget} paths")
    for psi in members:
        for beta in lower:
            out.append(beta.prepend(psi))
    out.sort(key=lambda p: p.key)
    return out


def enum_D(n: int, fragment: Fragment | str, alphabet: Iterable[str],
           limits: Limits = DEFAULT_LIMITS) -> list[DiamondAtom]:
    """D_n with symmetric duplicates removed, in canonical order."""
    fragment = Fragment.coerce(fragment)
    paths = enum_P(n, fragment, alphabet, limits)
    ops = (EQ,) if fragment is Fragment.EQ else (EQ, NEQ)
    total = len(paths) * (len(paths) + 1) // 2 * len(ops)
    if total > limits.budget:
        raise BudgetExceeded(f"D_{n} has {total} atoms, over the budget of {limits.budget}")
    out = [DiamondAtom(op, p, q) for i, p in enumerate(paths) for q in paths[i:] for op in ops]
    out.sort(key=lambda d: d.key)
    return out


def candidate_count(n: int, fragment: Fragment | str, alphabet: Iterable[str],
                    limits: Limits = DEFAULT_LIMITS) -> int:
    """How many (label, positive set) candidates enum_N must test at level n."""
    fragment = Fragment.coerce(fragment)
    alphabet = _alphabet(alphabet)
    if n == 0:
        return len(alphabet)
    free = len(enum_D(n, fragment, alphabet, limits)) - (1 if fragment is Fragment.EQ else 2)
    return len(alphabet) << free


def enum_N(n: int, fragment: Fragment | str, alphabet: Iterable[str],
           limits: Limits = DEFAULT_LIMITS) -> Iterator[NormalForm]:
    """Lazily yield the consistent members of N_n.

    Candidates always contain ⟨ε=ε⟩ and, in the full fragment, never ⟨ε≠ε⟩;
    any other choice is refuted by the one-node case of the evaluator, so
    these are not counted against the budget.  Consistency of each candidate
    is decided by building and verifying a model.
    """
    from .canonical import is_consistent

    fragment = Fragment.coerce(fragment)
    alphabet = _alphabet(alphabet)
    if n > limits.level_cap:
        raise BudgetExceeded(f"level {n} is above the level cap {limits.level_cap}")
    if n == 0:
        for a in alphabet:
            yield base_form(fragment, a)
        return
    atoms = enum_D(n, fragment, alphabet, limits)
    e = epsilon(n)
    forced_pos = DiamondAtom(EQ, e, e)
    forced_neg = DiamondAtom(NEQ, e, e)
    free = [d for d in atoms if d != forced_pos and d != forced_neg]
    if len(free) >= 63 or (len(alphabet) << len(free)) > limits.budget:
        raise BudgetExceeded(f"N_{n} needs 2^{len(free)} candidates per label, over the budget of {limits.budget}")
    examined = 0
    for a in alphabet:
        for bits in range(1 << len(free)):
            examined += 1
            pos = [forced_pos] + [d for i, d in enumerate(free) if bits >> i & 1]
            if is_consistent(fragment, alphabet, n, a, frozenset(pos), limits=limits):
                yield NormalForm(fragment, n, a, frozenset(pos))


class Universe:
    """The enumerated set N_n with bitmask indexes.

    ``label_mask[a]`` holds the members with label ``a`` and
    ``atom_mask[d]`` the members having ``d`` positive.
    """

    def __init__(self, n: int, fragment: Fragment, alphabet: tuple[str, ...], members: Sequence[NormalForm]):
        self.level = n
        self.fragment = fragment
        self.alphabet = alphabet
        self.members = sorted(members, key=lambda m: m.key)
        self.index = {m: i for i, m in enumerate(self.members)}
        self.full = (1 << len(self.members)) - 1
        self.label_mask = {a: 0 for a in alphabet}
        self.atom_mask: dict[DiamondAtom, int] = {}
        for i, m in enumerate(self.members):
            self.label_mask[m.label] |= 1 << i
            for d in m.positives:
                self.atom_mask[d] = self.atom_mask.get(d, 0) | (1 << i)

    def __len__(self) -> int:
        return len(self.members)

    def mask_of(self, forms: Iterable[NormalForm]) -> int:
        m = 0
        for f in forms:
            m |= 1 << self.index[f]
        return m

    def select(self, mask: int) -> list[NormalForm]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.members[i])
            mask >>= 1
            i += 1
        return out

    def atom(self, d: DiamondAtom) -> int:
        return self.atom_mask.get(d, 0)


def universe(n: int, fragment: Fragment | str, alphabet: Iterable[str],
             limits: Limits = DEFAULT_LIMITS) -> Universe:
    """The cached, fully enumerated N_n."""
    fragment = Fragment.coerce(fragment)
    alphabet = _alphabet(alphabet)
    key = (n, fragment, alphabet)
    with _lock:
        got = _universes.get(key)
        if got is not None:
            return got
    if n > limits.level_cap:
        raise BudgetExceeded(f"level {n} is above the level cap {limits.level_cap}")
    members = list(enum_N(n, fragment, alphabet, limits))
    u = Universe(n, fragment, alphabet, members)
    with _lock:
        return _universes.setdefault(key, u)


# ---------------------------------------------------------------------------
# expressions for normal forms

_expr_cache: dict = {}


def path_expression(p: NormalPath) -> PathExpr:
    """↓[ψ1]…↓[ψk]ε as a path expression, each guard its full normal-form conjunction."""
    key = ("p", p)
    got = _expr_cache.get(key)
    if got is None:
        out: PathExpr = EPS
        for s in reversed(p.steps):
            out = Concat(DOWN, Concat(Test(as_expression(s)), out))
        got = _expr_cache.setdefault(key, out)
    return got


def _atom_expression(d: DiamondAtom) -> NodeExpr:
    cls = EqDiamond if d.op == EQ else NeqDiamond
    return cls(path_expression(d.left), path_expression(d.right))


def as_expression(psi: NormalForm, alphabet: Iterable[str] | None = None, complete: bool = True,
                  limits: Limits = DEFAULT_LIMITS) -> NodeExpr:
    """The conjunction denoted by ``psi``.

    With ``complete`` every atom of D_n appears, negated when absent from the
    positives; the alphabet is then needed to enumerate D_n (it defaults to
    the labels occurring in ``psi``, which is only right when they cover the
    alphabet).  Without ``complete`` only the positive atoms are listed.
    """
    key = ("n", psi, complete, None if alphabet is None else _alphabet(alphabet))
    got = _expr_cache.get(key)
    if got is not None:
        return got
    parts: list[NodeExpr] = [Atom(psi.label)]
    if complete and psi.level == 0:
        e = epsilon(0)
        parts.append(_atom_expression(DiamondAtom(EQ, e, e)))
        if psi.fragment is Fragment.FULL:
            parts.append(Not(_atom_expression(DiamondAtom(NEQ, e, e))))
    elif complete:
        alpha = _alphabet(alphabet) if alphabet is not None else _labels_in(psi)
        for d in enum_D(psi.level, psi.fragment, alpha, limits):
            ex = _atom_expression(d)
            parts.append(ex if d in psi.positives else Not(ex))
    else:
        for d in sorted(psi.positives, key=lambda d: d.key):
            parts.append(_atom_expression(d))
    out = conj(parts)
    _expr_cache[key] = out
    return out


def _labels_in(psi: NormalForm) -> tuple[str, ...]:
    labels = {psi.label}
    for d in psi.positives:
        for p in (d.left, d.right):
            for s in p.steps:
                labels |= set(_labels_in(s))
    return tuple(sorted(labels))


def _conjuncts(e: NodeExpr) -> list[NodeExpr]:
    out, stack = [], [e]
    while stack:
        x = stack.pop()
        if isinstance(x, And):
            stack.append(x.right)
            stack.append(x.left)
        else:
            out.append(x)
    return out


def _read_path(a: PathExpr, n: int, fragment: Fragment, alphabet) -> NormalPath | None:
    steps = flatten(a)
    out = []
    if not steps or not isinstance(steps[-1], Eps):
        return None
    body = steps[:-1]
    if len(body) % 2 or len(body) // 2 > n:
        return None
    for i in range(0, len(body), 2):
        if not isinstance(body[i], Down) or not isinstance(body[i + 1], Test):
            return None
        psi = is_normal_node(body[i + 1].node, n - i // 2 - 1, fragment, alphabet)
        if psi is None:
            return None
        out.append(psi)
    return NormalPath(tuple(out), n)


def is_normal_node(e: NodeExpr, n: int, fragment: Fragment | str,
                   alphabet: Iterable[str] | None = None,
                   limits: Limits = DEFAULT_LIMITS) -> NormalForm | None:
    """Recognize a conjunction of the N_n shape and return its record.

    Conjunct order and the orientation of diamonds do not matter.  Every atom
    of D_n must occur exactly once, with or without negation, and the result
    must be consistent.
    """
    from .canonical import is_consistent

    fragment = Fragment.coerce(fragment)
    alpha = _alphabet(alphabet) if alphabet is not None else None
    label = None
    signs: dict[DiamondAtom, bool] = {}
    for c in _conjuncts(e):
        positive = True
        if isinstance(c, Not):
            positive, c = False, c.arg
        if isinstance(c, Atom) and positive:
            if label is not None or (alpha is not None and c.name not in alpha):
                return None
            label = c.name
            continue
        if not isinstance(c, (EqDiamond, NeqDiamond)):
            return None
        if isinstance(c, NeqDiamond) and fragment is Fragment.EQ:
            return None
        p = _read_path(c.left, n, fragment, alpha)
        q = _read_path(c.right, n, fragment, alpha)
        if p is None or q is None:
            return None
        d = make_atom(EQ if isinstance(c, EqDiamond) else NEQ, p, q)
        if d in signs:
            return None
        signs[d] = positive
    if label is None:
        return None
    if alpha is None:
        labels = {label}
        for d in signs:
            for p in (d.left, d.right):
                for s in p.steps:
                    labels |= set(_labels_in(s))
        alpha = tuple(sorted(labels))
    try:
        expected = enum_D(n, fragment, alpha, limits)
    except BudgetExceeded:
        return None
    if set(signs) != set(expected):
        return None
    pos = frozenset(d for d, s in signs.items() if s)
    if not is_consistent(fragment, alpha, n, label, pos, limits=limits):
        return None
    return NormalForm(fragment, n, label, pos)


# ---------------------------------------------------------------------------
# projection and lifting

_proj_cache: dict = {}


def project(psi: NormalForm, n: int) -> NormalForm:
    """The level-n member implied by a member of a level at least n."""
    if n > psi.level:
        raise ValueError("can only project downwards")
    if n == psi.level:
        return psi
    key = (psi, n)
    got = _proj_cache.get(key)
    if got is not None:
        return got
    pos = set()
    for d in psi.positives:
        if len(d.left) <= n and len(d.right) <= n:
            pos.add(make_atom(d.op, project_path(d.left, n), project_path(d.right, n)))
    out = NormalForm(psi.fragment, n, psi.label, frozenset(pos))
    _proj_cache[key] = out
    return out


def project_path(p: NormalPath, n: int) -> NormalPath:
    if len(p) > n:
        raise ValueError(f"path of length {len(p)} has no level-{n} counterpart")
    return NormalPath(tuple(project(s, n - i - 1) for i, s in enumerate(p.steps)), n)


def lift(psi: NormalForm, m: int, alphabet: Iterable[str], limits: Limits = DEFAULT_LIMITS) -> list[NormalForm]:
    """All level-m members whose disjunction is equivalent to ``psi``."""
    if m < psi.level:
        raise ValueError("lift target must not be below the source level")
    if m == psi.level:
        return [psi]
    u = universe(m, psi.fragment, alphabet, limits)
    return [x for x in u.members if project(x, psi.level) == psi]


def lift_path(p: NormalPath, m: int, fragment: Fragment | str, alphabet: Iterable[str],
              limits: Limits = DEFAULT_LIMITS) -> list[NormalPath]:
    """All level-m paths whose union is equivalent to ``p``."""
    if m < p.level:
        raise ValueError("lift target must not be below the source level")
    choices = [lift(s, m - i - 1, alphabet, limits) for i, s in enumerate(p.steps)]
    out = [NormalPath(tuple(c), m) for c in itertools.product(*choices)]
    return sorted(out, key=lambda x: x.key)


def complete_diamond(label: str, d: DiamondAtom, fragment: Fragment | str, alphabet: Iterable[str],
                     limits: Limits = DEFAULT_LIMITS) -> list[NormalForm]:
    """The members of N_n with label ``label`` and ``d`` positive."""
    u = universe(d.level, fragment, alphabet, limits)
    return u.select(u.label_mask.get(label, 0) & u.atom(d))


# ---------------------------------------------------------------------------
# normalization

class Normalizer:
    """Normalizes expressions at a fixed target level.

    The result for a node expression at level m is a bitmask over the
    universe N_m; for a path expression it is a dict from P_m paths to
    bitmasks of guards.  ``log`` collects the names of the axioms whose
    instances justify each rewriting step.
    """

    def __init__(self, fragment: Fragment | str, alphabet: Iterable[str], limits: Limits = DEFAULT_LIMITS):
        self.fragment = Fragment.coerce(fragment)
        self.alphabet = _alphabet(alphabet)
        self.limits = limits
        self.log: list[str] = []
        self._node: dict = {}
        self._path: dict = {}

    def universe(self, m: int) -> Universe:
        return universe(m, self.fragment, self.alphabet, self.limits)

    def _note(self, *names: str) -> None:
        self.log.extend(names)

    def node(self, e: NodeExpr, m: int) -> int:
        key = (e, m)
        got = self._node.get(key)
        if got is None:
            got = self._node_case(e, m)
            self._node[key] = got
        return got

    def _node_case(self, e: NodeExpr, m: int) -> int:
        u = self.universe(m)
        if isinstance(e, Atom):
            if e.name not in u.label_mask:
                raise ValueError(f"label {e.name!r} is not in the alphabet")
            self._note("LbAx1", "LbAx2")
            return u.label_mask[e.name]
        if isinstance(e, TrueNode):
            return u.full
        if isinstance(e, FalseNode):
            return 0
        if isinstance(e, Not):
            self._note("NdAx1")
            return u.full & ~self.node(e.arg, m)
        if isinstance(e, And):
            self._note("Der1", "Der2")
            return self.node(e.left, m) & self.node(e.right, m)
        if isinstance(e, Or):
            self._note("Der1", "Der2")
            return self.node(e.left, m) | self.node(e.right, m)
        if isinstance(e, Diamond):
            self._note("EqAx1")
            return self._compare(EQ, e.path, e.path, m)
        if isinstance(e, EqDiamond):
            self._note("EqAx3", "EqAx4", "EqAx2")
            return self._compare(EQ, e.left, e.right, m)
        if isinstance(e, NeqDiamond):
            if self.fragment is Fragment.EQ:
                raise ValueError("inequality test in the 'eq' fragment")
            self._note("NeqAx2", "NeqAx3", "NeqAx1")
            return self._compare(NEQ, e.left, e.right, m)
        raise TypeError(f"not a node expression: {e!r}")

    def _compare(self, op: str, left: PathExpr, right: PathExpr, m: int) -> int:
        u = self.universe(m)
        gl = self.path(left, m)
        gr = gl if left == right else self.path(right, m)
        out = 0
        for p, mp in gl.items():
            for q, mq in gr.items():
                both = mp & mq
                if both:
                    out |= both & u.atom(make_atom(op, p, q))
        return out

    def path(self, a: PathExpr, m: int) -> dict[NormalPath, int]:
        key = (a, m)
        got = self._path.get(key)
        if got is None:
            got = self._path_case(a, m)
            self._path[key] = got
        return got

    def _path_case(self, a: PathExpr, m: int) -> dict[NormalPath, int]:
        u = self.universe(m)
        if isinstance(a, Eps):
            return {epsilon(m): u.full}
        if isinstance(a, BotPath):
            self._note("PrAx1")
            return {}
        if isinstance(a, Down):
            if m == 0:
                raise ValueError("a child step cannot be normalized at level 0")
            self._note("LbAx1", "PrAx3", "IsAx5.2")
            out = {}
            for chi in self.universe(m - 1).members:
                p = NormalPath((chi,), m)
                mask = u.atom(DiamondAtom(EQ, p, p))
                if mask:
                    out[p] = mask
            return out
        if isinstance(a, Test):
            self._note("PrAx3")
            mask = self.node(a.node, m)
            return {epsilon(m): mask} if mask else {}
        if isinstance(a, Union):
            self._note("IsAx1", "IsAx2", "IsAx3")
            out = dict(self.path(a.left, m))
            for p, mask in self.path(a.right, m).items():
                out[p] = out.get(p, 0) | mask
            return out
        if isinstance(a, Concat):
            self._note("IsAx4", "IsAx6.1", "IsAx6.2", "Der21")
            out: dict[NormalPath, int] = {}
            for p, mask in self.path(a.left, m).items():
                k = len(p)
                if k == 0:
                    for q, mq in self.path(a.right, m).items():
                        both = mask & mq
                        if both:
                            out[q] = out.get(q, 0) | both
                    continue
                low = self.universe(m - k)
                end = low.index.get(p.steps[-1])
                if end is None:
                    continue
                for q, mq in self.path(a.right, m - k).items():
                    if not mq >> end & 1:
                        continue
                    r = NormalPath(p.steps + q.steps, m)
                    both = mask & u.atom(DiamondAtom(EQ, r, r))
                    if both:
                        out[r] = out.get(r, 0) | both
            return out
        raise TypeError(f"not a path expression: {a!r}")


def _target_level(d: int, level: int | None, limits: Limits) -> int:
    n = d if level is None else level
    if n < d:
        raise ValueError(f"level {n} is below the downward depth {d}")
    if n > limits.level_cap:
        raise BudgetExceeded(f"level {n} is above the level cap {limits.level_cap}")
    return n


def normalize_node(e: NodeExpr, fragment: Fragment | str, alphabet: Iterable[str], level: int | None = None,
                   limits: Limits = DEFAULT_LIMITS, log: list[str] | None = None) -> list[NormalForm]:
    """The members of N_n whose disjunction is equivalent to ``e``.

    ``n`` defaults to the downward depth of ``e``.  The list is empty
    exactly when ``e`` is inconsistent, and is sorted canonically.
    """
    e = desugar(e)
    n = _target_level(dd_node(e), level, limits)
    norm = Normalizer(fragment, alphabet, limits)
    mask = norm.node(e, n)
    if log is not None:
        log.extend(dict.fromkeys(norm.log))
    return norm.universe(n).select(mask)


def normalize_path(a: PathExpr, fragment: Fragment | str, alphabet: Iterable[str], level: int | None = None,
                   limits: Limits = DEFAULT_LIMITS, log: list[str] | None = None
                   ) -> list[tuple[NormalForm | None, NormalPath]]:
    """Guarded-union normal form of a path expression.

    Each pair ``(ψ, π)`` stands for the disjunct [ψ]π.  When every member in
    which π is realizable guards π, the guard is dropped and ``None`` is
    returned in its place; this always happens for ``eps`` and for paths
    starting with a child step.
    """
    a = desugar(a)
    n = _target_level(dd_path(a), level, limits)
    norm = Normalizer(fragment, alphabet, limits)
    gp = norm.path(a, n)
    if log is not None:
        log.extend(dict.fromkeys(norm.log))
    u = norm.universe(n)
    out: list[tuple[NormalForm | None, NormalPath]] = []
    for p in sorted(gp, key=lambda x: x.key):
        mask = gp[p]
        if mask == u.atom(DiamondAtom(EQ, p, p)):
            out.append((None, p))
        else:
            out.extend((psi, p) for psi in u.select(mask))
    return out


def guarded_pairs(a: PathExpr, fragment: Fragment | str, alphabet: Iterable[str], level: int,
                  limits: Limits = DEFAULT_LIMITS) -> set[tuple[NormalForm, NormalPath]]:
    """The fully expanded set of (guard, path) disjuncts at ``level``."""
    a = desugar(a)
    _target_level(dd_path(a), level, limits)
    norm = Normalizer(fragment, alphabet, limits)
    gp = norm.path(a, level)
    u = norm.universe(level)
    return {(psi, p) for p, mask in gp.items() for psi in u.select(mask)}
