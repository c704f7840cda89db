"""Satisfiability, validity and equivalence via normal forms and canonical models.

For downward depth at most 1 every answer is exact.  At depth 2 the
universe N_2 is far too large to enumerate, so normalization raises
BudgetExceeded; in that case the deciders fall back to a bounded search
for a model or a separating tree.  A hit is then rebuilt as the canonical
model of the realized level-2 type, so positive answers are still
certified; a miss re-raises BudgetExceeded instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .ast import (
    Fragment, NodeExpr, Not, PathExpr, check_fragment, dd_node, dd_path, labels_of,
)
from .canonical import NotConsistent, build_model
from .normal_form import (
    DEFAULT_LIMITS, BudgetExceeded, Limits, NormalForm, NormalPath, TypeComputer, guarded_pairs,
    normalize_node, universe,
)
from .oracle import DEFAULT_BOUNDS, Bounds, brute_equiv, brute_sat, trees
from .semantics import DataTree, Evaluator

__all__ = ["SatVerdict", "EquivVerdict", "PathEquivVerdict", "sat", "valid", "equiv_node", "equiv_path",
           "InternalFault"]


class InternalFault(RuntimeError):
    """A constructed witness failed evaluator verification."""


@dataclass(frozen=True)
class SatVerdict:
    sat: bool
    model: DataTree | None = None
    disjuncts: tuple[NormalForm, ...] = ()
    level: int = 0
    method: str = "normal-form"

    @property
    def model_size(self) -> int | None:
        return None if self.model is None else len(self.model)

    def __str__(self) -> str:
        return "SAT" if self.sat else "UNSAT"


@dataclass(frozen=True)
class EquivVerdict:
    equivalent: bool
    tree: DataTree | None = None
    node: int | None = None
    disjunct: NormalForm | None = None
    side: str | None = None
    level: int = 0
    method: str = "normal-form"

    def __str__(self) -> str:
        return "EQUIV" if self.equivalent else "DIFFER"


@dataclass(frozen=True)
class PathEquivVerdict:
    equivalent: bool
    tree: DataTree | None = None
    pair: tuple[int, int] | None = None
    side: str | None = None
    level: int = 0

    def __str__(self) -> str:
        return "EQUIV" if self.equivalent else "DIFFER"


def _alphabet(alphabet: Iterable[str] | None, *exprs) -> tuple[str, ...]:
    if alphabet is not None:
        out = set(alphabet)
    else:
        out = set()
        for e in exprs:
            out |= labels_of(e)
    return tuple(sorted(out)) or ("a",)


def _search_bounds(level: int, bounds: Bounds) -> Bounds:
    if bounds.max_depth >= level:
        return bounds
    return Bounds(bounds.max_nodes, level, bounds.max_branch, bounds.max_classes)


def sat(phi: NodeExpr, fragment: Fragment | str = Fragment.FULL, alphabet: Iterable[str] | None = None,
        limits: Limits = DEFAULT_LIMITS, bounds: Bounds = DEFAULT_BOUNDS) -> SatVerdict:
    """Decide satisfiability of ``phi`` and return a verified model when it is satisfiable."""
    fragment = Fragment.coerce(fragment)
    check_fragment(phi, fragment)
    alphabet = _alphabet(alphabet, phi)
    n = dd_node(phi)
    try:
        forms = normalize_node(phi, fragment, alphabet, limits=limits)
    except BudgetExceeded:
        return _sat_by_search(phi, fragment, alphabet, n, bounds)
    if not forms:
        return SatVerdict(False, None, (), n)
    model = build_model(forms[0])
    if not Evaluator(model).holds(model.root, phi):
        raise InternalFault(f"canonical model of {forms[0]} does not satisfy the input")
    return SatVerdict(True, model, tuple(forms), n)


def _sat_by_search(phi: NodeExpr, fragment: Fragment, alphabet, n: int, bounds: Bounds) -> SatVerdict:
    bounds = _search_bounds(n, bounds)
    found = brute_sat(phi, alphabet, bounds)
    if found is None:
        raise BudgetExceeded(f"level {n} cannot be enumerated and no model exists within {bounds}")
    psi = TypeComputer(found, fragment).type_of(found.root, n)
    try:
        model = build_model(psi)
    except NotConsistent as exc:
        raise InternalFault(f"realized type failed to rebuild: {exc}") from exc
    if not Evaluator(model).holds(model.root, phi):
        raise InternalFault("canonical model of a realized type does not satisfy the input")
    return SatVerdict(True, model, (psi,), n, "search")


def valid(phi: NodeExpr, fragment: Fragment | str = Fragment.FULL, alphabet: Iterable[str] | None = None,
          limits: Limits = DEFAULT_LIMITS, bounds: Bounds = DEFAULT_BOUNDS) -> bool:
    """``phi`` holds at every node of every tree iff its negation is unsatisfiable."""
    return not sat(Not(phi), fragment, alphabet, limits, bounds).sat


def equiv_node(phi: NodeExpr, psi: NodeExpr, fragment: Fragment | str = Fragment.FULL,
               alphabet: Iterable[str] | None = None, limits: Limits = DEFAULT_LIMITS,
               bounds: Bounds = DEFAULT_BOUNDS) -> EquivVerdict:
    """Decide whether two node expressions are equivalent.

    Both sides are normalized at the larger of their depths; they are
    equivalent iff the sets of disjuncts coincide.  Otherwise the canonical
    model of the least disjunct present on one side only separates them.
    """
    fragment = Fragment.coerce(fragment)
    check_fragment(phi, fragment)
    check_fragment(psi, fragment)
    alphabet = _alphabet(alphabet, phi, psi)
    n = max(dd_node(phi), dd_node(psi))
    try:
        left = set(normalize_node(phi, fragment, alphabet, n, limits))
        right = set(normalize_node(psi, fragment, alphabet, n, limits))
    except BudgetExceeded:
        return _equiv_by_search(phi, psi, fragment, alphabet, n, bounds)
    if left == right:
        return EquivVerdict(True, level=n)
    diff = sorted(left ^ right, key=lambda f: f.key)
    chosen = diff[0]
    model = build_model(chosen)
    ev = Evaluator(model)
    a, b = ev.holds(model.root, phi), ev.holds(model.root, psi)
    if a == b:
        raise InternalFault(f"canonical model of {chosen} does not separate the expressions")
    return EquivVerdict(False, model, model.root, chosen, "left" if chosen in left else "right", n)


def _equiv_by_search(phi, psi, fragment: Fragment, alphabet, n: int, bounds: Bounds) -> EquivVerdict:
    bounds = _search_bounds(n, bounds)
    sep = brute_equiv(phi, psi, alphabet, bounds)
    if sep is None:
        raise BudgetExceeded(f"level {n} cannot be enumerated; no separating tree within {bounds}")
    t, x = sep
    chosen = TypeComputer(t, fragment).type_of(x, n)
    try:
        model = build_model(chosen)
    except NotConsistent as exc:
        raise InternalFault(f"realized type failed to rebuild: {exc}") from exc
    ev = Evaluator(model)
    a, b = ev.holds(model.root, phi), ev.holds(model.root, psi)
    if a == b:
        raise InternalFault("canonical model of a separating type does not separate the expressions")
    return EquivVerdict(False, model, model.root, chosen, "left" if a else "right", n, "search")


def equiv_path(alpha: PathExpr, beta: PathExpr, fragment: Fragment | str = Fragment.FULL,
               alphabet: Iterable[str] | None = None, limits: Limits = DEFAULT_LIMITS) -> PathEquivVerdict:
    """Decide whether two path expressions denote the same relation on every tree.

    Both are expanded into sets of guarded disjuncts [ψ]π at the common
    level.  For an unmatched disjunct the model of ψ together with an end
    point of π is a pair related by exactly one side.
    """
    fragment = Fragment.coerce(fragment)
    check_fragment(alpha, fragment)
    check_fragment(beta, fragment)
    alphabet = _alphabet(alphabet, alpha, beta)
    n = max(dd_path(alpha), dd_path(beta))
    left = guarded_pairs(alpha, fragment, alphabet, n, limits)
    right = guarded_pairs(beta, fragment, alphabet, n, limits)
    if left == right:
        return PathEquivVerdict(True, level=n)
    psi, pi = min(left ^ right, key=lambda pr: (pr[0].key, pr[1].key))
    model = build_model(psi)
    ends = TypeComputer(model, fragment).paths(model.root, n).get(pi)
    if not ends:
        raise InternalFault(f"path {pi} is not realized in the model of its guard")
    order = {x: i for i, x in enumerate(model.nodes)}
    y = min(ends, key=order.__getitem__)
    ev = Evaluator(model)
    a, b = ev.related(model.root, y, alpha), ev.related(model.root, y, beta)
    if a == b:
        raise InternalFault("counter-pair does not separate the path expressions")
    return PathEquivVerdict(False, model, (model.root, y), "left" if (psi, pi) in left else "right", n)
