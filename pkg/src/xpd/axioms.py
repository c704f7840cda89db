"""Axiom schemes, the equational derivation checker and a soundness fuzzer.

Schemes are stored as pairs of templates over metavariables.  Inequational
schemes φ ≤ ψ are kept in their defining form φ ∨ ψ ≡ ψ (α ∪ β ≡ β for
paths), so every scheme is an equation.  Matching is purely syntactic.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .ast import (
    And, Atom, BotPath, Concat, Diamond, EqDiamond, Eps, FALSE, FalseNode, Fragment, FragmentError,
    NeqDiamond, NodeExpr, NodeHole, NodeVar, Not, Or, ParseError, PathExpr, PathHole, PathVar, TRUE, Test,
    Union, check_fragment, children, disj, parse_expr, rebuild, to_text,
)
from .oracle import random_node, random_path, random_tree
from .semantics import Evaluator

__all__ = [
    "Scheme", "Equation", "Step", "Derivation", "Verdict", "SCHEMES", "DERIVED", "scheme", "schemes",
    "instantiate", "match_axiom", "match_scheme", "check_derivation", "parse_script", "check_script",
    "fuzz_soundness", "FuzzReport", "substitute", "BUNDLED_PROOF",
]

NODE, PATH, LABEL = "node", "path", "label"

# ASCII spellings of metavariables, with Greek aliases accepted in scripts
_ALIASES = {"φ": "phi", "ψ": "psi", "ρ": "rho", "α": "alpha", "β": "beta", "γ": "gamma", "η": "eta"}


@dataclass(frozen=True)
class Equation:
    lhs: NodeExpr | PathExpr
    rhs: NodeExpr | PathExpr

    def __post_init__(self):
        if isinstance(self.lhs, NodeExpr) != isinstance(self.rhs, NodeExpr):
            raise TypeError("both sides of an equation must have the same sort")

    @property
    def kind(self) -> str:
        return NODE if isinstance(self.lhs, NodeExpr) else PATH

    def flipped(self) -> "Equation":
        return Equation(self.rhs, self.lhs)

    def __str__(self) -> str:
        return f"{to_text(self.lhs)} == {to_text(self.rhs)}"


@dataclass(frozen=True)
class Scheme:
    name: str
    kind: str
    metavariables: tuple[tuple[str, str], ...]
    lhs: object
    rhs: object
    inequational: bool = False
    fragment: Fragment = Fragment.EQ
    derived: bool = False

    def template(self) -> Equation | None:
        """The stored equation, with ≤ already expanded; None for alphabet-parametric schemes."""
        if self.lhs is None:
            return None
        if not self.inequational:
            return Equation(self.lhs, self.rhs)
        join = Or if self.kind == NODE else Union
        return Equation(join(self.lhs, self.rhs), self.rhs)

    def __str__(self) -> str:
        if self.name == "LbAx1":
            return "LbAx1: true == a1 | ... | ak"
        if self.name == "LbAx2":
            return "LbAx2: false == a & b  (a != b)"
        op = "<=" if self.inequational else "=="
        return f"{self.name}: {to_text(self.lhs)} {op} {to_text(self.rhs)}"


# ---------------------------------------------------------------------------
# axiom schemes

phi, psi = NodeVar("phi"), NodeVar("psi")
al, be, ga, et = PathVar("alpha"), PathVar("beta"), PathVar("gamma"), PathVar("eta")


def _vars(*names: str) -> tuple[tuple[str, str], ...]:
    sorts = {"phi": NODE, "psi": NODE, "rho": NODE, "alpha": PATH, "beta": PATH, "gamma": PATH, "eta": PATH,
             "a": LABEL, "b": LABEL}
    return tuple((n, sorts[n]) for n in names)


def _c(*parts) -> PathExpr:
    out = parts[0]
    for p in parts[1:]:
        out = Concat(out, p)
    return out


def _mk(name, kind, names, lhs, rhs, ineq=False, fragment=Fragment.EQ, derived=False) -> Scheme:
    return Scheme(name, kind, _vars(*names), lhs, rhs, ineq, fragment, derived)


_F = Fragment.FULL

SCHEMES: tuple[Scheme, ...] = (
    _mk("LbAx1", NODE, (), None, None),
    _mk("LbAx2", NODE, ("a", "b"), None, None),
    _mk("PrAx1", PATH, ("alpha", "beta"), _c(_c(al, Test(Not(Diamond(be)))), be), BotPath()),
    _mk("PrAx2", PATH, (), Test(TRUE), Eps()),
    _mk("PrAx3", PATH, ("phi", "psi"), Test(Or(phi, psi)), Union(Test(phi), Test(psi))),
    _mk("IsAx1", PATH, ("alpha", "beta", "gamma"), Union(Union(al, be), ga), Union(al, Union(be, ga))),
    _mk("IsAx2", PATH, ("alpha", "beta"), Union(al, be), Union(be, al)),
    _mk("IsAx3", PATH, ("alpha",), Union(al, al), al),
    _mk("IsAx4", PATH, ("alpha", "beta", "gamma"), Concat(al, Concat(be, ga)), Concat(Concat(al, be), ga)),
    _mk("IsAx5.1", PATH, ("alpha",), Concat(Eps(), al), al),
    _mk("IsAx5.2", PATH, ("alpha",), Concat(al, Eps()), al),
    _mk("IsAx6.1", PATH, ("alpha", "beta", "gamma"), Concat(al, Union(be, ga)), Union(Concat(al, be), Concat(al, ga))),
    _mk("IsAx6.2", PATH, ("alpha", "beta", "gamma"), Concat(Union(al, be), ga), Union(Concat(al, ga), Concat(be, ga))),
    _mk("IsAx7", PATH, ("alpha",), Union(BotPath(), al), al),
    _mk("NdAx1", NODE, ("phi", "psi"), phi, Or(Not(Or(Not(phi), psi)), Not(Or(Not(phi), Not(psi))))),
    _mk("NdAx2", NODE, ("phi",), Diamond(Test(phi)), phi),
    _mk("NdAx3", NODE, ("alpha", "beta"), Diamond(Union(al, be)), Or(Diamond(al), Diamond(be))),
    _mk("NdAx4", NODE, ("alpha", "beta"), Diamond(Concat(al, be)), Diamond(Concat(al, Test(Diamond(be))))),
    _mk("EqAx1", NODE, ("alpha",), EqDiamond(al, al), Diamond(al)),
    _mk("EqAx2", NODE, ("alpha", "beta"), EqDiamond(al, be), EqDiamond(be, al)),
    _mk("EqAx3", NODE, ("alpha", "beta", "gamma"), EqDiamond(Union(al, be), ga), Or(EqDiamond(al, ga), EqDiamond(be, ga))),
    _mk("EqAx4", NODE, ("phi", "alpha", "beta"), And(phi, EqDiamond(al, be)), EqDiamond(Concat(Test(phi), al), be)),
    _mk("EqAx5", NODE, ("alpha", "beta"), EqDiamond(al, be), Diamond(al), True),
    _mk("EqAx6", NODE, ("alpha", "beta"), And(EqDiamond(al, Eps()), EqDiamond(be, Eps())), EqDiamond(al, be), True),
    _mk("EqAx7", NODE, ("alpha", "beta", "gamma"), Diamond(Concat(ga, Test(EqDiamond(al, be)))),
        EqDiamond(Concat(ga, al), Concat(ga, be)), True),
    _mk("EqAx8", NODE, ("alpha", "beta", "gamma"), EqDiamond(al, Concat(be, Test(EqDiamond(Eps(), ga)))),
        EqDiamond(al, Concat(be, ga)), True),
    _mk("NeqAx1", NODE, ("alpha", "beta"), NeqDiamond(al, be), NeqDiamond(be, al), fragment=_F),
    _mk("NeqAx2", NODE, ("alpha", "beta", "gamma"), NeqDiamond(Union(al, be), ga),
        Or(NeqDiamond(al, ga), NeqDiamond(be, ga)), fragment=_F),
    _mk("NeqAx3", NODE, ("phi", "alpha", "beta"), And(phi, NeqDiamond(al, be)),
        NeqDiamond(Concat(Test(phi), al), be), fragment=_F),
    _mk("NeqAx4", NODE, ("alpha", "beta"), NeqDiamond(al, be), Diamond(al), True, _F),
    _mk("NeqAx5", NODE, ("alpha", "beta", "gamma"), Diamond(Concat(ga, Test(NeqDiamond(al, be)))),
        NeqDiamond(Concat(ga, al), Concat(ga, be)), True, _F),
    _mk("NeqAx6", NODE, ("alpha", "beta", "gamma", "eta"), And(EqDiamond(al, ga), EqDiamond(be, et)),
        Or(EqDiamond(al, be), NeqDiamond(ga, et)), True, _F),
    _mk("NeqAx7", NODE, ("alpha", "beta", "gamma", "eta"), And(NeqDiamond(al, ga), EqDiamond(be, et)),
        Or(NeqDiamond(al, be), NeqDiamond(ga, et)), True, _F),
    _mk("NeqAx8", NODE, ("alpha", "beta", "gamma", "eta"),
        EqDiamond(ga, _c(et, Test(And(Not(EqDiamond(al, be)), Diamond(al))), be)),
        NeqDiamond(ga, Concat(et, al)), True, _F),
    _mk("NeqAx9", NODE, ("alpha", "beta", "gamma", "eta"),
        NeqDiamond(ga, _c(et, Test(And(Not(NeqDiamond(al, be)), Diamond(al))), be)),
        NeqDiamond(ga, Concat(et, al)), True, _F),
    _mk("NeqAx10", NODE, ("alpha", "beta", "gamma", "eta"),
        EqDiamond(ga, _c(et, Test(And(Not(NeqDiamond(al, al)), EqDiamond(al, be))), al)),
        EqDiamond(ga, Concat(et, be)), True, _F),
)

DERIVED: tuple[Scheme, ...] = (
    _mk("Der1", NODE, ("phi", "psi"), Or(phi, psi), Or(psi, phi), derived=True),
    _mk("Der2", NODE, ("phi", "psi", "rho"), Or(phi, Or(psi, NodeVar("rho"))),
        Or(Or(phi, psi), NodeVar("rho")), derived=True),
    _mk("Der12", NODE, ("alpha", "beta"), Diamond(Concat(al, be)), Diamond(al), True, derived=True),
    _mk("Der13", NODE, ("alpha",), Diamond(Concat(al, Test(FALSE))), FALSE, derived=True),
    _mk("Der21", PATH, ("alpha", "phi", "psi"), Concat(Concat(al, Test(phi)), Test(psi)),
        Concat(al, Test(And(phi, psi))), derived=True),
)

_BY_NAME = {s.name: s for s in SCHEMES + DERIVED}


def scheme(name: str) -> Scheme:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown axiom scheme {name!r}") from None


def schemes(fragment: Fragment | str = Fragment.FULL, derived: bool = False) -> list[Scheme]:
    """The schemes available in a fragment, in table order."""
    fragment = Fragment.coerce(fragment)
    out = [s for s in SCHEMES if fragment is Fragment.FULL or s.fragment is Fragment.EQ]
    if derived:
        out += list(DERIVED)
    return out


# ---------------------------------------------------------------------------
# substitution and matching

def substitute(t, bindings: Mapping[str, object]):
    """Replace metavariables (and holes, bound to ``"_"``) in a template."""
    if isinstance(t, (NodeVar, PathVar)):
        if t.name not in bindings:
            raise KeyError(f"missing binding for {t.name}")
        return bindings[t.name]
    if isinstance(t, (NodeHole, PathHole)):
        return bindings["_"]
    kids = children(t)
    if not kids or not any(hasattr(k, "_fields") for k in kids):
        return t
    return rebuild(t, [substitute(k, bindings) if hasattr(k, "_fields") else k for k in kids])


def _match(t, e, b: dict) -> bool:
    if isinstance(t, NodeVar):
        if not isinstance(e, NodeExpr):
            return False
        return b.setdefault(t.name, e) == e
    if isinstance(t, PathVar):
        if not isinstance(e, PathExpr):
            return False
        return b.setdefault(t.name, e) == e
    if type(t) is not type(e):
        return False
    tk, ek = children(t), children(e)
    for x, y in zip(tk, ek):
        if hasattr(x, "_fields"):
            if not _match(x, y, b):
                return False
        elif x != y:
            return False
    return True


def _normalize_bindings(s: Scheme, bindings: Mapping[str, object]) -> dict:
    out = {}
    for k, v in bindings.items():
        k = _ALIASES.get(k, k)
        out[k] = v
    sorts = dict(s.metavariables)
    for name, sort in s.metavariables:
        if name not in out:
            raise KeyError(f"{s.name}: missing binding for {name}")
        v = out[name]
        if sort == LABEL:
            if isinstance(v, Atom):
                out[name] = v = v.name
            if not isinstance(v, str):
                raise TypeError(f"{s.name}: {name} must be a label")
        elif sort == NODE and not isinstance(v, NodeExpr):
            raise TypeError(f"{s.name}: {name} must be a node expression")
        elif sort == PATH and not isinstance(v, PathExpr):
            raise TypeError(f"{s.name}: {name} must be a path expression")
    extra = set(out) - set(sorts)
    if extra:
        raise KeyError(f"{s.name}: unknown metavariables {sorted(extra)}")
    return out


def instantiate(s: Scheme | str, bindings: Mapping[str, object] | None = None,
                alphabet: Iterable[str] | None = None) -> Equation:
    """The ground equation of a scheme under bindings (≤ already expanded)."""
    if isinstance(s, str):
        s = scheme(s)
    b = _normalize_bindings(s, bindings or {})
    if s.name == "LbAx1":
        if not alphabet:
            raise ValueError("LbAx1 needs the alphabet")
        return Equation(TRUE, disj(Atom(a) for a in sorted(set(alphabet))))
    if s.name == "LbAx2":
        if b["a"] == b["b"]:
            raise ValueError("LbAx2 needs two different labels")
        return Equation(FALSE, And(Atom(b["a"]), Atom(b["b"])))
    tmpl = s.template()
    return Equation(substitute(tmpl.lhs, b), substitute(tmpl.rhs, b))


def match_scheme(s: Scheme, eq: Equation, alphabet: Iterable[str] | None = None) -> dict | None:
    """Bindings under which ``s`` instantiates to exactly ``eq``, if any."""
    if s.name == "LbAx1":
        if alphabet and eq == instantiate(s, {}, alphabet):
            return {}
        return None
    if s.name == "LbAx2":
        if eq.lhs == FALSE and isinstance(eq.rhs, And) and isinstance(eq.rhs.left, Atom) \
                and isinstance(eq.rhs.right, Atom) and eq.rhs.left != eq.rhs.right:
            return {"a": eq.rhs.left.name, "b": eq.rhs.right.name}
        return None
    if eq.kind != s.kind:
        return None
    tmpl = s.template()
    b: dict = {}
    if _match(tmpl.lhs, eq.lhs, b) and _match(tmpl.rhs, eq.rhs, b):
        return b
    return None


def match_axiom(eq: Equation, fragment: Fragment | str = Fragment.FULL,
                alphabet: Iterable[str] | None = None) -> tuple[Scheme, dict] | None:
    """The first scheme in table order that has ``eq`` as an instance."""
    for s in schemes(fragment):
        b = match_scheme(s, eq, alphabet)
        if b is not None:
            return s, b
    return None


# ---------------------------------------------------------------------------
# derivations

@dataclass(frozen=True)
class Step:
    """One derivation step.

    ``rule`` is one of axiom, refl, sym, trans, congr.  ``sym`` may wrap an
    axiom directly (``inner``) instead of citing an earlier step.  ``claim``
    is an optional equation the step must produce.
    """

    rule: str
    name: str | None = None
    bindings: Mapping[str, object] = field(default_factory=dict)
    refs: tuple[int, ...] = ()
    expr: object = None
    context: object = None
    inner: "Step | None" = None
    claim: Equation | None = None
    number: int | None = None


@dataclass(frozen=True)
class Derivation:
    goal: Equation
    steps: tuple[Step, ...]


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step: int | str | None = None
    reason: str = ""
    equations: tuple[Equation, ...] = ()

    def __str__(self) -> str:
        if self.accepted:
            return "accepted"
        return f"rejected at step {self.step}: {self.reason}"


class _Reject(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def _plug(context, e):
    holes = [x for x in _walk(context) if isinstance(x, (NodeHole, PathHole))]
    if len(holes) != 1:
        raise _Reject(f"context must contain exactly one hole, found {len(holes)}")
    if isinstance(holes[0], NodeHole) != isinstance(e, NodeExpr):
        raise _Reject("hole sort does not match the equation sort")
    return substitute(context, {"_": e})


def _walk(e):
    yield e
    for k in children(e):
        if hasattr(k, "_fields"):
            yield from _walk(k)


def _apply(step: Step, done: list[Equation], fragment: Fragment, alphabet) -> Equation:
    def ref(i: int) -> Equation:
        if not 1 <= i <= len(done):
            raise _Reject(f"step {i} does not precede this step")
        return done[i - 1]

    if step.rule == "axiom":
        s = _BY_NAME.get(step.name or "")
        if s is None:
            raise _Reject(f"unknown axiom {step.name}")
        if s.fragment is Fragment.FULL and fragment is Fragment.EQ:
            raise _Reject(f"{s.name} is not available in the equality fragment")
        if step.bindings or not s.metavariables:
            try:
                eq = instantiate(s, step.bindings, alphabet)
            except (KeyError, TypeError, ValueError) as exc:
                raise _Reject(str(exc).strip("'\""))
            if step.claim is not None and step.claim != eq:
                raise _Reject(f"{step.claim} is not the instance {eq} of {s.name}")
            return eq
        if step.claim is None:
            raise _Reject(f"{s.name} needs bindings or a stated equation")
        if match_scheme(s, step.claim, alphabet) is None:
            raise _Reject(f"{step.claim} is not an instance of {s.name}")
        return step.claim
    if step.rule == "refl":
        return Equation(step.expr, step.expr)
    if step.rule == "sym":
        if step.inner is not None:
            return _apply(step.inner, done, fragment, alphabet).flipped()
        return ref(step.refs[0]).flipped()
    if step.rule == "trans":
        e1, e2 = ref(step.refs[0]), ref(step.refs[1])
        if e1.rhs != e2.lhs:
            raise _Reject(f"cannot chain: {to_text(e1.rhs)} differs from {to_text(e2.lhs)}")
        return Equation(e1.lhs, e2.rhs)
    if step.rule == "congr":
        e = ref(step.refs[0])
        return Equation(_plug(step.context, e.lhs), _plug(step.context, e.rhs))
    raise _Reject(f"unknown rule {step.rule}")


def check_derivation(d: Derivation, fragment: Fragment | str = Fragment.FULL,
                     alphabet: Iterable[str] | None = None) -> Verdict:
    """Check every step and then that the last equation is the goal."""
    fragment = Fragment.coerce(fragment)
    alphabet = sorted(set(alphabet)) if alphabet else None
    done: list[Equation] = []
    for i, step in enumerate(d.steps, 1):
        label = step.number if step.number is not None else i
        try:
            eq = _apply(step, done, fragment, alphabet)
            for side in (eq.lhs, eq.rhs):
                check_fragment(side, fragment)
            if step.claim is not None and step.claim != eq:
                raise _Reject(f"step yields {eq}, not the stated {step.claim}")
        except FragmentError as exc:
            return Verdict(False, label, str(exc), tuple(done))
        except _Reject as exc:
            return Verdict(False, label, exc.reason, tuple(done))
        done.append(eq)
    if not done:
        return Verdict(False, "goal", "no steps", ())
    if done[-1] != d.goal:
        return Verdict(False, "goal", f"last step proves {done[-1]}, not the goal {d.goal}", tuple(done))
    return Verdict(True, None, "", tuple(done))


# ---------------------------------------------------------------------------
# proof scripts

class ScriptError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


_STEP = re.compile(r"^\s*(\d+)\.\s*(.*?)\s*$")


def _equation(text: str, alphabet, fragment) -> Equation:
    if text.count("==") != 1:
        raise ValueError(f"expected one '==' in {text!r}")
    left, right = text.split("==")
    l, _ = parse_expr(left.strip(), alphabet, fragment)
    r, _ = parse_expr(right.strip(), alphabet, fragment)
    if isinstance(l, NodeExpr) != isinstance(r, NodeExpr):
        # retry the sides as paths, since "eps"-like text parses either way
        from .ast import parse_path
        l, r = parse_path(left.strip(), alphabet, fragment), parse_path(right.strip(), alphabet, fragment)
    return Equation(l, r)


def _bindings(text: str, s: Scheme | None, alphabet, fragment) -> dict:
    text = text.strip()
    if not text:
        return {}
    sorts = dict(s.metavariables) if s else {}
    out = {}
    from .ast import parse_node, parse_path
    for part in text.split(","):
        if "=" not in part:
            raise ValueError(f"bad binding {part.strip()!r}")
        name, value = part.split("=", 1)
        name = _ALIASES.get(name.strip(), name.strip())
        value = value.strip()
        sort = sorts.get(name)
        if sort == LABEL:
            out[name] = value
        elif sort == NODE:
            out[name] = parse_node(value, alphabet, fragment)
        elif sort == PATH:
            out[name] = parse_path(value, alphabet, fragment)
        else:
            out[name], _ = parse_expr(value, alphabet, fragment)
    return out


def _parse_step(body: str, number: int, alphabet, fragment) -> Step:
    claim = None
    m = re.match(r"^(.*?)\s+by\s+(\S+)\s*$", body)
    if m and "==" in m.group(1):
        return Step("axiom", name=m.group(2), claim=_equation(m.group(1), alphabet, fragment), number=number)
    head, _, rest = body.partition(" ")
    rest = rest.strip()
    if head in ("axiom", "sym") and rest.startswith("axiom") or head == "axiom":
        inner_text = rest[len("axiom"):].strip() if head == "sym" else rest
        # NAME {bindings} [: claim]
        m = re.match(r"^(\S+?)\s*(\{(.*?)\})?\s*(:\s*(.*))?$", inner_text)
        if not m:
            raise ValueError(f"cannot read axiom step {body!r}")
        name = m.group(1)
        s = _BY_NAME.get(name)
        bindings = _bindings(m.group(3) or "", s, alphabet, fragment)
        if m.group(5):
            claim = _equation(m.group(5), alphabet, fragment)
        ax = Step("axiom", name=name, bindings=bindings, claim=claim if head == "axiom" else None, number=number)
        if head == "sym":
            return Step("sym", inner=ax, claim=claim, number=number)
        return ax
    if head == "refl":
        e, _ = parse_expr(rest, alphabet, fragment)
        return Step("refl", expr=e, number=number)
    if head == "sym":
        return Step("sym", refs=(int(rest),), number=number)
    if head == "trans":
        a, b = rest.split()
        return Step("trans", refs=(int(a), int(b)), number=number)
    if head == "congr":
        m = re.match(r"^(\d+)\s+in\s+(.*)$", rest)
        if not m:
            raise ValueError(f"cannot read congruence step {body!r}")
        ctx, holes = parse_expr(m.group(2), alphabet, fragment, allow_hole=True)
        return Step("congr", refs=(int(m.group(1)),), context=ctx, number=number)
    raise ValueError(f"unknown rule {head!r}")


def parse_script(text: str) -> tuple[Derivation, Fragment, tuple[str, ...]]:
    """Read a proof script into a derivation plus its fragment and alphabet.

    Step numbers must be consecutive from 1 and are what ``sym``/``trans``
    and ``congr`` refer to.
    """
    alphabet: tuple[str, ...] | None = None
    fragment = Fragment.FULL
    goal_text = None
    goal_line = 0
    steps: list[tuple[int, int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        if sep and key == "alphabet":
            alphabet = tuple(sorted(x.strip() for x in value.split(",") if x.strip()))
        elif sep and key == "fragment":
            fragment = Fragment.coerce(value.strip())
        elif sep and key == "goal":
            goal_text, goal_line = value.strip(), lineno
        else:
            m = _STEP.match(line)
            if not m:
                raise ScriptError(lineno, f"cannot read {line!r}")
            steps.append((lineno, int(m.group(1)), m.group(2)))
    if goal_text is None:
        raise ScriptError(0, "missing goal line")
    try:
        goal = _equation(goal_text, alphabet, fragment)
    except (ParseError, ValueError) as exc:
        raise ScriptError(goal_line, str(exc)) from None
    parsed = []
    for expect, (lineno, number, body) in enumerate(steps, 1):
        if number != expect:
            raise ScriptError(lineno, f"expected step {expect}, found {number}")
        try:
            parsed.append(_parse_step(body, number, alphabet, fragment))
        except (ParseError, ValueError) as exc:
            raise ScriptError(lineno, str(exc)) from None
    return Derivation(goal, tuple(parsed)), fragment, alphabet or ()


def check_script(text: str) -> Verdict:
    """Parse and check a proof script; syntax errors become rejections."""
    try:
        d, fragment, alphabet = parse_script(text)
    except ScriptError as exc:
        return Verdict(False, f"line {exc.line}", exc.message)
    return check_derivation(d, fragment, alphabet)


BUNDLED_PROOF = """\
alphabet: a,b
fragment: eq
goal: eps/down == down/eps
1. axiom IsAx5.1 {alpha=down}
2. sym axiom IsAx5.2 {alpha=down}
3. trans 1 2
"""


# ---------------------------------------------------------------------------
# soundness fuzzing

@dataclass
class Counterexample:
    scheme: str
    equation: str
    tree: str
    detail: str


@dataclass
class FuzzReport:
    fragment: str
    trees: int
    seed: int
    instances: dict[str, int] = field(default_factory=dict)
    counterexamples: dict[str, list[Counterexample]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.counterexamples.values())

    def lines(self) -> list[str]:
        out = []
        for name, n in self.instances.items():
            bad = self.counterexamples.get(name, [])
            out.append(f"{name}: {n} instances, {len(bad)} counterexamples")
            for c in bad[:3]:
                out.append(f"  {c.equation}  on  {c.tree}  ({c.detail})")
        return out


def _random_bindings(rng: random.Random, s: Scheme, alphabet, fragment) -> dict:
    out = {}
    for name, sort in s.metavariables:
        if sort == NODE:
            out[name] = random_node(rng, alphabet, fragment, max_dd=2, size=rng.randint(1, 4))
        elif sort == PATH:
            out[name] = random_path(rng, alphabet, fragment, max_dd=2, size=rng.randint(1, 4))
        else:
            out[name] = rng.choice(alphabet)
    if s.name == "LbAx2" and len(alphabet) > 1:
        out["a"], out["b"] = rng.sample(list(alphabet), 2)
    return out


def fuzz_soundness(fragment: Fragment | str = Fragment.FULL, alphabet: Sequence[str] = ("a", "b"),
                   trees: int = 200, seed: int = 0, per_tree: int = 2, max_nodes: int = 8, max_depth: int = 3,
                   scheme_list: Sequence[Scheme] | None = None) -> FuzzReport:
    """Compare both sides of random scheme instances on random trees.

    Node equations are compared as node sets and path equations as pair
    sets, on ``trees`` random trees with ``per_tree`` instances of every
    scheme each.
    """
    fragment = Fragment.coerce(fragment)
    alphabet = sorted(set(alphabet))
    rng = random.Random(seed)
    todo = list(scheme_list) if scheme_list is not None else schemes(fragment, derived=True)
    report = FuzzReport(fragment.value, trees, seed)
    for s in todo:
        report.instances[s.name] = 0
        report.counterexamples[s.name] = []
    from .semantics import print_tree
    for _ in range(trees):
        t = random_tree(rng, alphabet, max_nodes, max_depth)
        ev = Evaluator(t)
        for s in todo:
            if s.name == "LbAx2" and len(alphabet) < 2:
                continue
            for _ in range(per_tree if s.metavariables else 1):
                eq = _instance(s, rng, alphabet, fragment)
                report.instances[s.name] += 1
                if eq.kind == NODE:
                    same = ev.nodes(eq.lhs) == ev.nodes(eq.rhs)
                else:
                    same = ev.path(eq.lhs) == ev.path(eq.rhs)
                if not same:
                    report.counterexamples[s.name].append(
                        Counterexample(s.name, str(eq), print_tree(t), f"{eq.kind} sets differ"))
    return report


def _instance(s: Scheme, rng, alphabet, fragment) -> Equation:
    if s.lhs is None:
        return instantiate(s, _random_bindings(rng, s, alphabet, fragment), alphabet)
    tmpl = s.template()
    b = _random_bindings(rng, s, alphabet, fragment)
    return Equation(substitute(tmpl.lhs, b), substitute(tmpl.rhs, b))
