"""Canonical models for normal forms.

``build_model`` turns a member of N_n into a finite data tree whose root
satisfies it.  The construction is inductive: the subtrees hung below the
root are canonical models of lower-level forms, copied and surgically
adjusted so that each positive diamond gets a witness and no negated one
does, and then data classes are glued.  Every model is checked against the
form before it is returned, so a form is consistent exactly when this
succeeds.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ast import Fragment
from .normal_form import (
    EQ, NEQ, DEFAULT_LIMITS, DiamondAtom, Limits, NormalForm, NormalPath, TypeComputer,
    as_expression, epsilon, make_atom,
)
from .semantics import DataTree, Evaluator, NodeRecord, restrict

__all__ = [
    "NotConsistent", "Witness", "Classification", "build_model", "build_model_eq", "build_model_full",
    "surgery_eq", "surgery_full", "classify", "is_consistent", "has_conjunct", "verify_model", "hung_subtrees",
]


class NotConsistent(ValueError):
    """The form has no model: the construction or its verification failed."""


@dataclass(frozen=True)
class Witness:
    """A tree together with a distinguished node ``x``."""

    tree: DataTree
    x: int


def has_conjunct(psi: NormalForm, d: DiamondAtom | tuple[str, NormalPath, NormalPath], positive: bool = True) -> bool:
    """Whether ``psi`` contains ``d`` (positive) or its negation (``positive=False``)."""
    if not isinstance(d, DiamondAtom):
        d = make_atom(*d)
    if d.level != psi.level:
        raise ValueError("atom and form are at different levels")
    return (d in psi.positives) == positive


# ---------------------------------------------------------------------------
# tree assembly

class _Builder:
    """A mutable tree with union-find over data classes."""

    def __init__(self):
        self.labels: list[str] = []
        self.data: list[int] = []
        self.kids: list[list[int]] = []
        self._parent: dict[int, int] = {}
        self._next = 0
        self.parts: list[tuple[int, DataTree]] = []

    def fresh(self) -> int:
        c = self._next
        self._next += 1
        self._parent[c] = c
        return c

    def find(self, c: int) -> int:
        root = c
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[c] != root:
            self._parent[c], c = root, self._parent[c]
        return root

    def merge(self, c1: int, c2: int) -> None:
        r1, r2 = self.find(c1), self.find(c2)
        if r1 != r2:
            self._parent[max(r1, r2)] = min(r1, r2)

    def node(self, label: str, cls: int, parent: int | None = None) -> int:
        x = len(self.labels)
        self.labels.append(label)
        self.data.append(cls)
        self.kids.append([])
        if parent is not None:
            self.kids[parent].append(x)
        return x

    def hang(self, parent: int | None, t: DataTree, top: int | None = None,
             keep: dict[int, int] | None = None, fresh_for: Iterable[int] = ()) -> dict[int, int]:
        """Copy ``t`` (or its subtree at ``top``) below ``parent``.

        Source classes are mapped consistently to fresh classes, except that
        ``keep`` maps source classes to existing builder classes and nodes in
        ``fresh_for`` each get a class of their own.  Returns the node map.
        """
        cmap: dict[int, int] = dict(keep or {})
        lone = set(fresh_for)
        nmap: dict[int, int] = {}
        start = t.root if top is None else top
        stack = [(start, parent)]
        while stack:
            y, p = stack.pop()
            if y in lone:
                c = self.fresh()
            else:
                src = t.data(y)
                if src not in cmap:
                    cmap[src] = self.fresh()
                c = cmap[src]
            nmap[y] = self.node(t.label(y), c, p)
            for k in reversed(t.children(y)):
                stack.append((k, nmap[y]))
        if parent == 0:
            self.parts.append((nmap[start], restrict(t, start)))
        return nmap

    def cls(self, x: int) -> int:
        return self.find(self.data[x])

    def freeze_raw(self) -> DataTree:
        nodes = {x: NodeRecord(self.labels[x], self.find(self.data[x]), tuple(self.kids[x]))
                 for x in range(len(self.labels))}
        return DataTree(nodes, 0)

    def freeze(self) -> DataTree:
        return self.freeze_raw().normalized()


def _copy_with(t: DataTree, top: int, *, fresh_all: bool, lone: int | None = None) -> tuple[DataTree, int]:
    """Copy ``t`` with the subtree at ``top`` duplicated as a new last child of its parent.

    With ``fresh_all`` the duplicate gets classes unused in ``t``; otherwise
    it keeps its classes except that the copy of ``lone`` gets a new class.
    Returns the new tree and the duplicate's id of ``lone`` (or of ``top``).
    """
    b = _Builder()
    existing = {c: b.fresh() for c in sorted(t.classes())}
    nmap = b.hang(None, t, keep=existing)
    host = nmap[t.parent(top)]
    if fresh_all:
        cm = b.hang(host, t, top)
    else:
        cm = b.hang(host, t, top, keep=existing, fresh_for=[lone] if lone is not None else [])
    return b.freeze_raw(), cm[lone if lone is not None else top]


# ---------------------------------------------------------------------------
# surgeries

def _witnesses(tc: TypeComputer, root: int, p: NormalPath) -> list[int]:
    ends = tc.paths(root, p.level).get(p, [])
    order = {x: i for i, x in enumerate(tc.tree.nodes)}
    return sorted(set(ends), key=order.__getitem__)


def _check_surgery(psi: NormalForm, w: Witness, alpha: NormalPath, betas: Sequence[NormalPath]) -> None:
    tc = TypeComputer(w.tree, psi.fragment)
    root = w.tree.root
    if tc.type_of(root, psi.level) != psi:
        raise NotConsistent("surgery changed the type of the root")
    if w.x not in tc.paths(root, psi.level).get(alpha, ()):
        raise NotConsistent("surgery node does not realize the path")
    cx = w.tree.data(w.x)
    for beta in betas:
        for y in tc.paths(root, psi.level).get(beta, ()):
            if w.tree.data(y) == cx:
                raise NotConsistent(f"surgery node shares its class with an end point of {beta}")


def surgery_eq(psi: NormalForm, t: DataTree, alpha: NormalPath, betas: Sequence[NormalPath]) -> Witness:
    """Find a tree of the same type as ``t`` with an α-end point in a class no β reaches.

    ``t`` must satisfy ``psi`` at its root.  For α = ε the tree is returned
    unchanged.  Otherwise the subtree at the first α-end point is duplicated
    with entirely fresh classes, and the duplicate's root is the witness.
    """
    if alpha.is_eps:
        w = Witness(t, t.root)
    else:
        tc = TypeComputer(t, psi.fragment)
        ends = _witnesses(tc, t.root, alpha)
        if not ends:
            raise NotConsistent(f"path {alpha} is not realized")
        tree, x = _copy_with(t, ends[0], fresh_all=True)
        w = Witness(tree, x)
    _check_surgery(psi, w, alpha, betas)
    return w


def surgery_full(psi: NormalForm, t: DataTree, alpha: NormalPath, betas: Sequence[NormalPath]) -> Witness:
    """The inequality-aware surgery.

    Let k0 be the least k such that the suffix of α after k steps has no two
    end points in different classes (¬⟨σ≠σ⟩ holds at the k-th node of α).
    If k0 = 0 the first α-end point is used as is.  Otherwise the subtree at
    the depth-k0 ancestor of the first α-end point x' is duplicated keeping
    its classes, except the copy of x' which gets a new class.
    """
    if alpha.is_eps:
        w = Witness(t, t.root)
        _check_surgery(psi, w, alpha, betas)
        return w
    tc = TypeComputer(t, psi.fragment)
    ends = _witnesses(tc, t.root, alpha)
    if not ends:
        raise NotConsistent(f"path {alpha} is not realized")
    k0 = None
    for k in range(len(alpha) + 1):
        host = psi if k == 0 else alpha.steps[k - 1]
        sfx = alpha.suffix(k)
        if DiamondAtom(NEQ, sfx, sfx) not in host.positives:
            k0 = k
            break
    if k0 is None:
        raise NotConsistent("no step of the path has a constant suffix")
    first = ends[0]
    if k0 == 0:
        w = Witness(t, first)
    else:
        z = first
        while t.depth(z) > k0:
            z = t.parent(z)
        tree, x = _copy_with(t, z, fresh_all=False, lone=first)
        w = Witness(tree, x)
    _check_surgery(psi, w, alpha, betas)
    return w


# ---------------------------------------------------------------------------
# classification for the full fragment

Pair = tuple[NormalForm, NormalPath]
Quad = tuple[Pair, Pair]


@dataclass
class Classification:
    """Sets V, U, Z, U1, U2 read off a level n+1 form of the full fragment."""

    v_eq_neq: list[Pair] = field(default_factory=list)
    v_eq_noneq: list[Pair] = field(default_factory=list)
    v_noeq_neq: list[Pair] = field(default_factory=list)
    v_noeq_noneq: list[Pair] = field(default_factory=list)
    u: list[Quad] = field(default_factory=list)
    z: set = field(default_factory=set)
    u1: list[Quad] = field(default_factory=list)
    u2: list[Quad] = field(default_factory=list)
    z_classes: list[list[Pair]] = field(default_factory=list)

    def summary(self) -> list[str]:
        def pair(p):
            return f"({p[0].short()}, {p[1]})"
        return [
            "V(=,≠): " + ", ".join(map(pair, self.v_eq_neq)),
            "V(=,¬≠): " + ", ".join(map(pair, self.v_eq_noneq)),
            "V(¬=,≠): " + ", ".join(map(pair, self.v_noeq_neq)),
            "V(¬=,¬≠): " + ", ".join(map(pair, self.v_noeq_noneq)),
            "U1: " + ", ".join(f"{pair(a)}~{pair(b)}" for a, b in self.u1),
            "U2: " + ", ".join(f"{pair(a)}~{pair(b)}" for a, b in self.u2),
            "Z classes: " + "; ".join("{" + ", ".join(map(pair, c)) + "}" for c in self.z_classes),
        ]


def _split(p: NormalPath) -> Pair:
    return (p.head(), p.tail())


def _join(pair: Pair) -> NormalPath:
    return pair[1].prepend(pair[0])


def _pair_key(pair: Pair) -> tuple:
    return (pair[0].key, pair[1].key)


def classify(phi: NormalForm) -> Classification:
    """Classify the pairs (ψ, α) and quadruples mentioned by ``phi``."""
    n = phi.level
    e = epsilon(n)
    pos = phi.positives
    mentioned: set[Pair] = set()
    for d in pos:
        for p in (d.left, d.right):
            if not p.is_eps:
                mentioned.add(_split(p))
    out = Classification()
    for pair in sorted(mentioned, key=_pair_key):
        p = _join(pair)
        eq = make_atom(EQ, e, p) in pos
        neq = make_atom(NEQ, e, p) in pos
        if eq and neq:
            out.v_eq_neq.append(pair)
        elif eq:
            out.v_eq_noneq.append(pair)
        elif neq:
            out.v_noeq_neq.append(pair)
        else:
            out.v_noeq_noneq.append(pair)
    vee, vnn = set(out.v_eq_neq), set(out.v_noeq_neq)
    for a in out.v_noeq_neq:
        for b in out.v_noeq_neq:
            pa, pb = _join(a), _join(b)
            if make_atom(EQ, pa, pb) in pos and make_atom(NEQ, pa, pb) not in pos:
                out.z.add((a, b))
    for d in sorted(pos, key=lambda d: d.key):
        if d.op != EQ or d.left.is_eps or d.right.is_eps:
            continue
        if make_atom(NEQ, d.left, d.right) not in pos:
            continue
        a, b = _split(d.left), _split(d.right)
        if a in vnn and b in vnn:
            out.u.append((a, b))
        elif a in vee and b in vnn:
            out.u.append((a, b))
        elif b in vee and a in vnn:
            out.u.append((b, a))
    for quad in out.u:
        (psi, alpha), (rho, beta) = quad
        in_u1 = False
        for (p1, gamma), (p2, delta) in out.z:
            if p1 == psi and p2 == rho \
                    and make_atom(EQ, gamma, alpha) in psi.positives \
                    and make_atom(EQ, delta, beta) in rho.positives:
                in_u1 = True
                break
        (out.u1 if in_u1 else out.u2).append(quad)
    # equivalence classes of Z over V(¬=,≠)
    parent = {p: p for p in out.v_noeq_neq}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for a, b in out.z:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    groups: dict = {}
    for p in out.v_noeq_neq:
        if (p, p) in out.z:
            groups.setdefault(find(p), []).append(p)
    out.z_classes = [g for g in groups.values()]
    return out


def _check_z_transitive(cl: Classification) -> None:
    z = cl.z
    for a, b in z:
        for b2, c in z:
            if b == b2 and (a, c) not in z:
                raise NotConsistent("the Z relation is not transitive")


# ---------------------------------------------------------------------------
# the constructions

_models: dict[NormalForm, DataTree] = {}
_failures: dict[NormalForm, str] = {}
_lock = threading.RLock()


def verify_model(phi: NormalForm, tree: DataTree, x: int | None = None, alphabet: Iterable[str] | None = None) -> bool:
    """Check that node ``x`` (default the root) of ``tree`` satisfies ``phi``.

    The realized type is compared with ``phi``; at levels 0 and 1 the
    evaluator also checks the full signed conjunction.
    """
    x = tree.root if x is None else x
    if TypeComputer(tree, phi.fragment).type_of(x, phi.level) != phi:
        return False
    if phi.level <= 1:
        labels = set(alphabet or ()) | _labels(phi)
        ev = Evaluator(tree)
        if not ev.holds(x, as_expression(phi, labels)):
            return False
    return True


def _labels(phi: NormalForm) -> set[str]:
    out = {phi.label}
    for d in phi.positives:
        for p in (d.left, d.right):
            for s in p.steps:
                out |= _labels(s)
    return out


def build_model(phi: NormalForm, trace: list[str] | None = None) -> DataTree:
    """A finite data tree whose root satisfies ``phi``.

    Raises NotConsistent when ``phi`` has no model.  Results are memoized.
    """
    with _lock:
        got = _models.get(phi)
        if got is not None and trace is None:
            return got
        if phi in _failures and trace is None:
            raise NotConsistent(_failures[phi])
    try:
        if phi.level == 0:
            t = DataTree({0: NodeRecord(phi.label, 0, ())}, 0)
        elif phi.fragment is Fragment.EQ:
            t = build_model_eq(phi, trace)
        else:
            t = build_model_full(phi, trace)
        if not verify_model(phi, t):
            raise NotConsistent("the constructed tree does not satisfy the form")
    except NotConsistent as exc:
        with _lock:
            _failures[phi] = str(exc)
        raise
    with _lock:
        _models[phi] = t
    return t


def _sub(psi: NormalForm) -> DataTree:
    return build_model(psi)


def build_model_eq(phi: NormalForm, trace: list[str] | None = None,
                   parts: list[tuple[int, DataTree]] | None = None) -> DataTree:
    """Canonical model construction for the equality-only fragment."""
    n = phi.level
    pos = phi.positives
    e = epsilon(n)
    b = _Builder()
    root = b.node(phi.label, b.fresh())
    v: list[Pair] = []
    u: list[Quad] = []
    for d in sorted(pos, key=lambda d: d.key):
        if d.left.is_eps and d.right.is_eps:
            continue
        if d.left.is_eps:
            v.append(_split(d.right))
        else:
            u.append((_split(d.left), _split(d.right)))
    for psi, alpha in v:
        t = _sub(psi)
        tc = TypeComputer(t, phi.fragment)
        realized = sorted(tc.paths(t.root, n - 1), key=lambda p: p.key)
        betas = [g for g in realized if make_atom(EQ, e, g.prepend(psi)) not in pos]
        w = surgery_eq(psi, t, alpha, betas)
        nm = b.hang(root, w.tree)
        b.merge(b.data[root], b.data[nm[w.x]])
        if trace is not None:
            trace.append(f"rule 1: hang a model of {psi.short()} and glue the end of {alpha} to the root")
    for (psi, alpha), (rho, beta) in u:
        p_rb = beta.prepend(rho)
        t1 = _sub(psi)
        tc1 = TypeComputer(t1, phi.fragment)
        real1 = sorted(tc1.paths(t1.root, n - 1), key=lambda p: p.key)
        betas1 = [g for g in real1 if make_atom(EQ, p_rb, g.prepend(psi)) not in pos]
        w1 = surgery_eq(psi, t1, alpha, betas1)
        tcw = TypeComputer(w1.tree, phi.fragment)
        cx = w1.tree.data(w1.x)
        mus = [m for m, ends in tcw.paths(w1.tree.root, n - 1).items()
               if any(w1.tree.data(y) == cx for y in ends)]
        t2 = _sub(rho)
        tc2 = TypeComputer(t2, phi.fragment)
        real2 = sorted(tc2.paths(t2.root, n - 1), key=lambda p: p.key)
        betas2 = [dl for dl in real2
                  if any(make_atom(EQ, dl.prepend(rho), m.prepend(psi)) not in pos for m in mus)]
        w2 = surgery_eq(rho, t2, beta, betas2)
        nm1 = b.hang(root, w1.tree)
        nm2 = b.hang(root, w2.tree)
        b.merge(b.data[nm1[w1.x]], b.data[nm2[w2.x]])
        if trace is not None:
            trace.append(f"rule 2: hang models of {psi.short()} and {rho.short()}, glue the ends of {alpha} and {beta}")
    if parts is not None:
        parts.extend(b.parts)
    return b.freeze()


def build_model_full(phi: NormalForm, trace: list[str] | None = None,
                     parts: list[tuple[int, DataTree]] | None = None) -> DataTree:
    """Canonical model construction for the fragment with inequality."""
    n = phi.level
    pos = phi.positives
    cl = classify(phi)
    _check_z_transitive(cl)
    if trace is not None:
        trace.extend(cl.summary())
    b = _Builder()
    root = b.node(phi.label, b.fresh())
    glue_root: list[int] = []
    glue_pairs: list[tuple[int, int]] = []

    for psi, alpha in cl.v_eq_neq:
        t = _sub(psi)
        others = [beta for (p, beta) in cl.v_eq_noneq if p == psi]
        if others:
            tc = TypeComputer(t, phi.fragment)
            classes = set()
            for beta in others:
                classes |= {t.data(y) for y in tc.paths(t.root, n - 1).get(beta, ())}
            ends = _witnesses(tc, t.root, alpha)
            if not ends:
                raise NotConsistent(f"path {alpha} is not realized")
            x = next((y for y in ends if t.data(y) in classes), ends[0])
            w = Witness(t, x)
        else:
            betas = [g for (p, g) in cl.v_noeq_neq if p == psi]
            w = surgery_full(psi, t, alpha, betas)
        nm = b.hang(root, w.tree)
        glue_root.append(nm[w.x])
        b.hang(root, t)
        if trace is not None:
            trace.append(f"rule 1: two models of {psi.short()}, the end of {alpha} in the first joins the root class")
    for psi, alpha in cl.v_eq_noneq + cl.v_noeq_neq:
        b.hang(root, _sub(psi))
        if trace is not None:
            trace.append(f"rules 2-3: a model of {psi.short()} for {alpha}")
    for (psi, alpha), (rho, beta) in cl.u1:
        b.hang(root, _sub(psi))
        b.hang(root, _sub(rho))
        if trace is not None:
            trace.append(f"rule 4 (U1): plain models of {psi.short()} and {rho.short()}")
    for (psi, alpha), (rho, beta) in cl.u2:
        p_rb = beta.prepend(rho)
        t1 = _sub(psi)
        tc1 = TypeComputer(t1, phi.fragment)
        real1 = sorted(tc1.paths(t1.root, n - 1), key=lambda p: p.key)
        betas1 = [g for g in real1 if make_atom(EQ, p_rb, g.prepend(psi)) not in pos]
        w1 = surgery_full(psi, t1, alpha, betas1)
        tcw = TypeComputer(w1.tree, phi.fragment)
        cx = w1.tree.data(w1.x)
        mus = [m for m, ends in tcw.paths(w1.tree.root, n - 1).items()
               if any(w1.tree.data(y) == cx for y in ends)]
        t2 = _sub(rho)
        tc2 = TypeComputer(t2, phi.fragment)
        real2 = sorted(tc2.paths(t2.root, n - 1), key=lambda p: p.key)
        betas2 = [dl for dl in real2
                  if any(make_atom(EQ, dl.prepend(rho), m.prepend(psi)) not in pos for m in mus)]
        w2 = surgery_full(rho, t2, beta, betas2)
        nm1 = b.hang(root, w1.tree)
        nm2 = b.hang(root, w2.tree)
        glue_pairs.append((nm1[w1.x], nm2[w2.x]))
        if trace is not None:
            trace.append(f"rule 4 (U2): surgered models of {psi.short()} and {rho.short()}, ends glued last")

    # gluing on the disjoint-union partition
    staged = b.freeze_raw()
    tc = TypeComputer(staged, phi.fragment)
    realized = tc.paths(staged.root, n)
    for x in glue_root:
        b.merge(b.data[root], b.data[x])
    for pair in cl.v_eq_noneq:
        for y in realized.get(_join(pair), ()):
            b.merge(b.data[root], b.data[y])
    for group in cl.z_classes:
        ends = [y for pair in group for y in realized.get(_join(pair), ())]
        for y in ends[1:]:
            b.merge(b.data[ends[0]], b.data[y])
    for x, y in glue_pairs:
        b.merge(b.data[x], b.data[y])
    if trace is not None:
        trace.append(f"glued {len(glue_root)} rule-1 ends and {len(cl.v_eq_noneq)} V(=,¬≠) paths to the root, "
                     f"{len(cl.z_classes)} Z classes, {len(glue_pairs)} U2 pairs")
    if parts is not None:
        parts.extend(b.parts)
    return b.freeze()


def hung_subtrees(phi: NormalForm) -> tuple[DataTree, list[tuple[int, DataTree]]]:
    """Rebuild the model of ``phi`` and report each subtree hung below the root.

    Each entry pairs the root child's id in the returned tree with the
    subtree as it was before the data classes were glued.
    """
    parts: list[tuple[int, DataTree]] = []
    if phi.level == 0:
        return build_model(phi), parts
    if phi.fragment is Fragment.EQ:
        t = build_model_eq(phi, None, parts)
    else:
        t = build_model_full(phi, None, parts)
    return t, parts


_consistency: dict[tuple, bool] = {}


def is_consistent(fragment: Fragment | str, alphabet: Iterable[str], level: int, label: str,
                  positives: frozenset, limits: Limits = DEFAULT_LIMITS) -> bool:
    """Whether the candidate (label, positives) at ``level`` has a model."""
    fragment = Fragment.coerce(fragment)
    key = (fragment, tuple(sorted(set(alphabet))), level, label, frozenset(positives))
    with _lock:
        got = _consistency.get(key)
    if got is not None:
        return got
    phi = NormalForm(fragment, level, label, frozenset(positives))
    try:
        build_model(phi)
        ok = True
    except NotConsistent:
        ok = False
    with _lock:
        _consistency[key] = ok
    return ok
